"""Outward continuation of the profile from the origin interval to r_max.

Two independent extension routes:

* :func:`extend_rk` marches the initial value problem with an adaptive
  embedded Dormand-Prince 5(4) pair.  The raw system (f' = f_r,
  f_r' = ode_rhs) is well behaved near the axis but becomes numerically
  hostile at large radius: the curvature term and the transport term of the
  right-hand side agree to a relative O(r^{2-2 alpha}) and their difference
  drowns in rounding once f_r is large, while the slope-ratio relaxation
  makes explicit steps stability-limited.  The march therefore changes
  variables twice, each time to an algebraically equivalent form in which
  the computed quantities stay well conditioned:

    phase A  state (f, f_r) in r             from the handoff radius until
                                             f > 0 comfortably;
    phase B  state (phi, v), x = ln r        phi = q - alpha0 carried
             q = r f_r / f, v = ln f_r       explicitly so the attracting
                                             slope-ratio manifold stays
                                             resolvable in doubles;
    phase C  state v alone                   once the fast relaxation mode is
             q slaved to its manifold        below tolerance, q is slaved to
                                             the (closed-form) quasi-static
                                             root plus its first invariance
                                             correction, which removes the
                                             stiffness entirely.

  All three phases use the same embedded pair and per-step error control,
  land exactly on the requested output radii, and evaluate the structural
  monitors (w > 0, f_r > 0, f_rr > 0) on every accepted step.

* :func:`extend_picard` advances the solution across a window
  [r1, r1 + delta] by iterating the interior integral operator

      Phi_1(g,h)(r) = a0 + int_{r1}^r h
      Phi_2(g,h)(r) = (1/r) { (1/lam) int s(1+h^2)^2/(s h - g)
                              - (n-1) int h^3 - (n-2) int h } + (r1/r) b0

  which contracts with factor <= 1/3 for small enough windows.  It is slow
  but independent of the Runge-Kutta route and serves as the
  cross-validation oracle.

Exploratory runs (lambda <= 1/(n-1), where nothing is guaranteed) stay in
phase A and report monitor events instead of aborting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DenominatorCollapse,
    DomainError,
    NoConvergence,
    StepUnderflow,
)
from .profile_core import (
    Parameters,
    RadialProfile,
    SolverConfig,
    ode_rhs,
    validate,
)
from .quadrature import cumulative_simpson_uniform

__all__ = [
    "MonitorEvent",
    "ExtensionWindow",
    "WindowDiagnostics",
    "SegmentSolution",
    "extend_rk",
    "extend_picard",
    "extend_picard_chain",
    "detect_breakdown",
    "w_identity_residuals",
    "solve_profile",
]


@dataclass(frozen=True)
class MonitorEvent:
    """A structural-inequality violation detected during or after a march."""

    kind: str  # w_nonpositive | fr_nonpositive | frr_nonpositive | step_underflow
    r: float
    values: dict


@dataclass(frozen=True)
class ExtensionWindow:
    """Initial data for one interior fixed-point window.

    The admissibility hypothesis is r1 * b0 - a0 >= a1 > 0; ``a1`` is the
    certified lower bound carried into the in-window denominator estimate
    s h - g >= a1 / 2.
    """

    r1: float
    a0: float
    b0: float
    a1: float
    delta: float

    def __post_init__(self):
        if not (self.r1 > 0.0 and self.delta > 0.0):
            raise DomainError("window needs r1 > 0 and delta > 0")
        if not (self.r1 * self.b0 - self.a0 >= self.a1 > 0.0):
            raise DomainError(
                f"window hypothesis violated: r1 b0 - a0 = {self.r1 * self.b0 - self.a0}"
                f" < a1 = {self.a1}"
            )


@dataclass(frozen=True)
class WindowDiagnostics:
    iterations: int
    distances: tuple[float, ...]
    observed_ratio: float
    delta_final: float
    restarts: int


@dataclass(frozen=True)
class SegmentSolution:
    """Fixed-point solution on one window [r1, r1 + delta]."""

    r: np.ndarray
    f: np.ndarray
    fr: np.ndarray
    diagnostics: WindowDiagnostics


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) core
# ---------------------------------------------------------------------------

_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_ERR = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_MAX_STEPS = 4_000_000


class _PhaseStop(Exception):
    """Internal: a phase-level stopping condition fired at (x, y)."""

    def __init__(self, x, y, reason):
        super().__init__(reason)
        self.x = x
        self.y = y
        self.reason = reason


def _adaptive_march(rhs, x0, y0, x_end, *, rtol, atol, out_nodes, emit,
                    after_step=None, h0=None, stats=None):
    """March y' = rhs(x, y) from x0 to x_end with the embedded 5(4) pair.

    ``out_nodes`` is a sorted array of radii in (x0, x_end]; every node is
    landed on exactly and passed to ``emit(x, y)``.  ``after_step(x, y)``
    runs on accepted steps and may raise :class:`_PhaseStop` to hand control
    back to the caller (phase switching, monitor aborts).  ``rhs`` may
    return None to veto a trial step (forces rejection and a smaller step).
    ``stats`` accumulates step counts and the per-component error sums used
    by the self-convergence estimate.
    """
    dim = len(y0)
    x = x0
    y = tuple(map(float, y0))
    k1 = rhs(x, y)
    if k1 is None:
        raise StepUnderflow(f"right-hand side rejected the initial state at {x0}")
    stats = stats if stats is not None else {}
    stats.setdefault("steps", 0)
    stats.setdefault("rejected", 0)
    stats.setdefault("err_sums", [0.0] * dim)

    node_i = 0
    m_nodes = len(out_nodes)
    span = x_end - x0
    h = min(span / 256.0, h0) if h0 else span / 256.0
    err_prev = 1.0

    while x < x_end:
        if stats["steps"] > _MAX_STEPS:
            raise StepUnderflow(
                f"step budget exhausted at x = {x} (suspected unresolved stiffness)",
                x=x, y=y,
            )
        target = x_end if node_i >= m_nodes else float(out_nodes[node_i])
        hit_node = x + h * 1.0000001 >= target
        h_use = target - x if hit_node else h
        if h_use <= abs(x) * 1e3 * np.finfo(float).eps and h_use <= span * 1e-13:
            raise StepUnderflow(f"step {h_use:.3e} underflowed at x = {x:.6e}", x=x, y=y)

        ks = [k1] + [None] * 6
        y_stages_ok = True
        for s in range(1, 7):
            acc = [0.0] * dim
            row = _DP_A[s]
            for j, a in enumerate(row):
                if a != 0.0:
                    kj = ks[j]
                    for d in range(dim):
                        acc[d] += a * kj[d]
            ys = tuple(y[d] + h_use * acc[d] for d in range(dim))
            ki = rhs(x + _DP_C[s] * h_use, ys)
            if ki is None:
                y_stages_ok = False
                break
            ks[s] = ki
        if y_stages_ok:
            y_new = ys  # stage 6 state: the 5th-order solution (FSAL layout)
            err = [0.0] * dim
            for j, e in enumerate(_DP_ERR):
                if e != 0.0:
                    kj = ks[j]
                    for d in range(dim):
                        err[d] += e * kj[d]
            err_norm = 0.0
            for d in range(dim):
                sc = atol[d] + rtol * max(abs(y[d]), abs(y_new[d]))
                err_norm = max(err_norm, abs(h_use * err[d]) / sc)
        if not y_stages_ok or not math.isfinite(err_norm):
            stats["rejected"] += 1
            h = h_use * 0.25
            continue

        if err_norm <= 1.0:
            for d in range(dim):
                stats["err_sums"][d] += abs(h_use * err[d])
            x = target if hit_node else x + h_use
            y = y_new
            k1 = ks[6]
            stats["steps"] += 1
            if hit_node and node_i < m_nodes:
                emit(x, y, k1)
                node_i += 1
            # PI controller (Gustafsson weights); a node-clipped step must not
            # shrink the working step below what the controller would allow.
            fac = 0.9 * err_norm ** -0.14 * err_prev ** 0.08 if err_norm > 0 else 5.0
            err_prev = max(err_norm, 1e-10)
            h = max(h_use * min(5.0, max(0.2, fac)), h if hit_node else 0.0)
            if after_step is not None:
                after_step(x, y, k1)
        else:
            stats["rejected"] += 1
            err_prev = 1.0
            h = h_use * max(0.2, 0.9 * err_norm ** -0.2)
    return x, y, k1


# ---------------------------------------------------------------------------
# stabilized slope-ratio forms
# ---------------------------------------------------------------------------


class _Regime:
    """Cached combinations for the certified large-radius formulation."""

    def __init__(self, params: Parameters):
        self.n = params.n
        self.lam = params.lam
        self.beta = params.lam * (params.n - 1) - 1.0
        if self.beta > 0.0:
            self.alpha0 = params.lam * (params.n - 1) / self.beta
            self.a0m1 = 1.0 / self.beta  # alpha0 - 1, computed without subtraction
            # phi* ~ Khat / fr^2 on the slaved manifold
            self.khat = (self.alpha0 - self.lam * self.a0m1 ** 2) / self.beta
        else:
            self.alpha0 = math.inf
            self.a0m1 = math.inf
            self.khat = math.nan

    def rhs_phase_b(self, x, y):
        phi, v = y
        if v > 170.0:
            return None
        fr2 = math.exp(2.0 * v)
        qm1 = self.a0m1 + phi
        if qm1 <= 0.0:
            return None
        q = self.alpha0 + phi
        lq1 = self.lam * qm1
        big = self.beta * phi * (2.0 + fr2)
        b_val = (self.n - self.alpha0) - phi - big / lq1 + q / (fr2 * lq1)
        dv = (q / fr2 - self.beta * phi) * (1.0 + fr2) / lq1
        return (q * b_val, dv)

    def slaved_phi(self, fr2: float) -> tuple[float, float]:
        """(phi0 + first correction, phi0) for the quasi-static slope ratio.

        phi0 solves lam phi^2 + sigma phi + gamma = 0 with
        gamma = -Khat beta - alpha0/fr2,
        sigma = 2 lam (alpha0 - 1) - (1 + 1/fr2) + beta (1 + fr2),
        taken in the root-product form so no cancellation occurs as
        phi0 -> Khat/fr2 -> 0.
        """
        lam, beta, alpha0 = self.lam, self.beta, self.alpha0
        gamma = -self.khat * beta - alpha0 / fr2
        sigma = 2.0 * lam * self.a0m1 - (1.0 + 1.0 / fr2) + beta * (1.0 + fr2)
        disc = sigma * sigma - 4.0 * lam * gamma
        phi0 = -2.0 * gamma / (sigma + math.sqrt(disc))
        # first invariance correction Q1 = (d phi0/dx) / (q dB/dphi)
        dphi0_dfr2 = -(phi0 * (beta + 1.0 / fr2 ** 2) + alpha0 / fr2 ** 2) / (
            2.0 * lam * phi0 + sigma
        )
        q = alpha0 + phi0
        qm1 = self.a0m1 + phi0
        lq1 = lam * qm1
        dv = (q / fr2 - beta * phi0) * (1.0 + fr2) / lq1
        dphi0_dx = dphi0_dfr2 * 2.0 * fr2 * dv
        num = beta * (2.0 + fr2) * phi0 - q / fr2
        dbdphi = -1.0 - (beta * (2.0 + fr2) - 1.0 / fr2) / lq1 + num / (lq1 * qm1)
        q1 = dphi0_dx / (q * dbdphi)
        return phi0 + q1, phi0

    def rhs_phase_c(self, x, y):
        (v,) = y
        if v > 170.0:
            return None
        fr2 = math.exp(2.0 * v)
        phi, _ = self.slaved_phi(fr2)
        qm1 = self.a0m1 + phi
        q = self.alpha0 + phi
        dv = (q / fr2 - self.beta * phi) * (1.0 + fr2) / (self.lam * qm1)
        return (dv,)

    def point_from_phase_b(self, x, phi, v):
        r = math.exp(x)
        fr = math.exp(v)
        fr2 = fr * fr
        q = self.alpha0 + phi
        qm1 = self.a0m1 + phi
        f = r * fr / q
        d_val = (q / fr2 - self.beta * phi) / (self.lam * qm1)
        frr = (1.0 + fr2) * fr * d_val / r
        w = f * qm1
        return f, fr, frr, w


# ---------------------------------------------------------------------------
# the Runge-Kutta continuation
# ---------------------------------------------------------------------------


def _output_nodes(r_lo: float, r_max: float, config: SolverConfig) -> np.ndarray:
    if config.output_grid == "native":
        base: list[float] = []
    elif config.output_grid == "uniform":
        m = max(16, 8 * config.grid_density)
        base = list(np.linspace(r_lo, r_max, m + 1)[1:])
    else:  # log
        decades = math.log10(r_max / r_lo)
        m = max(8, int(math.ceil(decades * config.grid_density)))
        base = list(np.geomspace(r_lo, r_max, m + 1)[1:])
    extra = [float(p) for p in config.extra_radii if r_lo < p <= r_max]
    nodes = np.array(sorted(set(base + extra + [r_max])))
    keep = np.ones(nodes.size, dtype=bool)
    keep[1:] = np.diff(nodes) > 1e-12 * nodes[1:]
    return nodes[keep]


class _OutputCollector:
    def __init__(self):
        self.r: list[float] = []
        self.f: list[float] = []
        self.fr: list[float] = []
        self.frr: list[float] = []

    def add(self, r, f, fr, frr):
        if self.r and r <= self.r[-1]:
            return
        self.r.append(r)
        self.f.append(f)
        self.fr.append(fr)
        self.frr.append(frr)


def extend_rk(
    params: Parameters,
    profile: RadialProfile,
    config: SolverConfig | None = None,
    *,
    mode: str = "certified",
) -> tuple[RadialProfile, list[MonitorEvent], dict]:
    """Continue ``profile`` out to ``config.r_max``.

    Returns the extended profile, the monitor events seen during the march
    (empty for a healthy certified run), and a stats dict with step counts
    and the accumulated error estimate for f(r_max).  In certified mode the
    march aborts at the first event; exploratory runs record events and stop
    only when the equation itself becomes unsolvable (w -> 0).
    """
    config = config or SolverConfig()
    validate(params)
    if mode not in ("certified", "exploratory"):
        raise DomainError(f"unknown mode {mode!r}")
    certified = mode == "certified"
    if certified and not params.global_regime:
        raise DomainError(
            f"certified mode needs lambda > 1/(n-1); got lambda = {params.lam}"
            f" with threshold {1.0 / (params.n - 1)}"
        )

    r_hand = min(config.resolved_r_switch(params), profile.r_max)
    if config.r_max < r_hand:
        raise DomainError("r_max below the handoff radius")
    if config.r_max <= profile.r_max and config.r_max <= r_hand:
        return profile, [], {"steps": 0, "err_estimate": 0.0}

    start = profile.at(r_hand)
    n, lam, mu = params.n, params.lam, params.mu
    events: list[MonitorEvent] = []
    regime = _Regime(params)
    out = _OutputCollector()
    native = config.output_grid == "native"
    nodes = _output_nodes(r_hand, config.r_max, config)
    stats: dict = {"err_sums_rel": 0.0}

    def note(kind, r, f, fr, frr, w):
        events.append(MonitorEvent(kind, r, {"f": f, "fr": fr, "frr": frr, "w": w}))

    # ---- phase A: (f, fr) in r --------------------------------------------
    f_gate = 0.25 * abs(mu)

    def rhs_a(r, y):
        f, fr = y
        w = r * fr - f
        if w <= 0.0:
            return None
        s = 1.0 + fr * fr
        return (fr, s * s / (lam * w) - (n - 1) / r * s * fr)

    def monitor_a(r, y, k):
        f, fr = y
        w = r * fr - f
        frr = k[1]
        if native:
            out.add(r, f, fr, frr)
        bad = None
        if w <= 0.0:
            bad = "w_nonpositive"
        elif fr <= 0.0:
            bad = "fr_nonpositive"
        elif frr <= 0.0:
            bad = "frr_nonpositive"
        if bad is not None:
            note(bad, r, f, fr, frr, w)
            if certified:
                raise _PhaseStop(r, y, "abort")
        if certified and f >= f_gate:
            raise _PhaseStop(r, y, "switch_b")

    def emit_a(r, y, k):
        out.add(r, y[0], y[1], k[1])

    atol_a = (config.abs_tol * max(1.0, abs(mu)), config.abs_tol)
    x_a, y_a = r_hand, (start.f, start.fr)
    phase_after_a = None
    aborted = False
    try:
        x_a, y_a, _ = _adaptive_march(
            rhs_a, x_a, y_a, config.r_max,
            rtol=config.rel_tol, atol=atol_a,
            out_nodes=nodes[nodes > r_hand], emit=emit_a,
            after_step=monitor_a, h0=0.05 * r_hand,
            stats=stats.setdefault("phase_a", {}),
        )
    except _PhaseStop as stop:
        if stop.reason == "abort":
            aborted = True
        else:
            phase_after_a = stop
        x_a, y_a = stop.x, stop.y
    except StepUnderflow as err:
        if err.x is not None:
            x_a, y_a = err.x, err.y
        fa, fra = y_a
        k_end = rhs_a(x_a, y_a)
        note("step_underflow", x_a, fa, fra,
             k_end[1] if k_end is not None else math.nan, x_a * fra - fa)
        aborted = True

    sa = stats.get("phase_a", {})
    if sa:
        stats["err_sums_rel"] += sa["err_sums"][0] / max(abs(mu) / 4.0, 1e-12) + sa[
            "err_sums"
        ][1]

    if aborted or phase_after_a is None:
        # exploratory end, certified abort, or r_max inside phase A
        return _merge(params, profile, r_hand, out, config), events, _final_stats(stats, out)

    # ---- phase B: (phi, v) in x = ln r ------------------------------------
    r_b = phase_after_a.x
    f_b, fr_b = phase_after_a.y
    phi_b = r_b * fr_b / f_b - regime.alpha0
    x_b0 = math.log(r_b)
    x_end = math.log(config.r_max)
    nodes_r = nodes[nodes > r_b]
    nodes_b = np.log(nodes_r)
    tol_q = config.rel_tol * regime.alpha0 + config.abs_tol

    def snap_radius(x):
        # log-space node targets round-trip through exp with an ulp or two
        # of drift; store the requested radius when we landed on one
        r = math.exp(x)
        i = int(np.searchsorted(nodes_r, r * (1.0 - 1e-12)))
        if i < nodes_r.size and abs(nodes_r[i] - r) <= 4e-13 * r:
            return float(nodes_r[i])
        return r

    def emit_b(x, y, k):
        f, fr, frr, w = regime.point_from_phase_b(x, y[0], y[1])
        out.add(snap_radius(x), f, fr, frr)

    def monitor_b(x, y, k):
        phi, v = y
        if v >= 165.0:
            raise StepUnderflow(
                f"profile slope exceeds the floating-point range near"
                f" r = {math.exp(x):.4g}; reduce r_max", x=x, y=y,
            )
        fr2 = math.exp(2.0 * v)
        if native:
            emit_b(x, y, k)
        d_num = (regime.alpha0 + phi) / fr2 - regime.beta * phi
        if regime.a0m1 + phi <= 0.0 or d_num <= 0.0:
            f, fr, frr, w = regime.point_from_phase_b(x, phi, v)
            note("w_nonpositive" if regime.a0m1 + phi <= 0 else "frr_nonpositive",
                 math.exp(x), f, fr, frr, w)
            if certified:
                raise _PhaseStop(x, y, "abort")
        if 400.0 <= fr2 <= 1e12:
            slaved, phi0 = regime.slaved_phi(fr2)
            q1 = slaved - phi0
            if abs(q1) <= tol_q and abs(phi - phi0) <= 10.0 * (abs(q1) + tol_q):
                raise _PhaseStop(x, y, "switch_c")

    stats_b: dict = {}
    phase_after_b = None
    try:
        x_bf, y_bf, _ = _adaptive_march(
            regime.rhs_phase_b, x_b0, (phi_b, math.log(fr_b)), x_end,
            rtol=config.rel_tol, atol=(1e-14, config.abs_tol),
            out_nodes=nodes_b, emit=emit_b,
            after_step=monitor_b, stats=stats_b,
        )
    except _PhaseStop as stop:
        if stop.reason == "abort":
            aborted = True
        else:
            phase_after_b = stop
        x_bf, y_bf = stop.x, stop.y
    stats["phase_b"] = stats_b
    if stats_b:
        stats["err_sums_rel"] += (
            stats_b["err_sums"][0] / regime.alpha0 + stats_b["err_sums"][1]
        )

    if aborted or phase_after_b is None:
        return _merge(params, profile, r_hand, out, config), events, _final_stats(stats, out)

    # ---- phase C: slaved scalar v in x ------------------------------------
    x_c0 = phase_after_b.x
    v_c0 = phase_after_b.y[1]
    nodes_c = np.log(nodes[nodes > math.exp(x_c0) * (1 + 1e-14)])

    def emit_c(x, y, k):
        phi, _ = regime.slaved_phi(math.exp(2.0 * y[0]))
        f, fr, frr, w = regime.point_from_phase_b(x, phi, y[0])
        out.add(snap_radius(x), f, fr, frr)

    def monitor_c(x, y, k):
        if y[0] >= 165.0:
            raise StepUnderflow(
                f"profile slope exceeds the floating-point range near"
                f" r = {math.exp(x):.4g}; reduce r_max", x=x, y=y,
            )
        if native:
            emit_c(x, y, k)

    stats_c: dict = {}
    _adaptive_march(
        regime.rhs_phase_c, x_c0, (v_c0,), x_end,
        rtol=config.rel_tol, atol=(config.abs_tol,),
        out_nodes=nodes_c, emit=emit_c,
        after_step=monitor_c, stats=stats_c,
    )
    stats["phase_c"] = stats_c
    if stats_c:
        stats["err_sums_rel"] += stats_c["err_sums"][0]

    return _merge(params, profile, r_hand, out, config), events, _final_stats(stats, out)


def _final_stats(stats: dict, out: _OutputCollector) -> dict:
    steps = sum(s.get("steps", 0) for s in stats.values() if isinstance(s, dict))
    f_end = abs(out.f[-1]) if out.f else 0.0
    est = 2.0 * stats["err_sums_rel"] * max(1.0, f_end)
    return {
        "steps": steps,
        "err_estimate": est,
        "err_sums_rel": stats["err_sums_rel"],
        "phases": {k: v for k, v in stats.items() if isinstance(v, dict)},
    }


def _merge(
    params: Parameters,
    origin: RadialProfile,
    r_hand: float,
    out: _OutputCollector,
    config: SolverConfig,
) -> RadialProfile:
    keep = origin.r <= r_hand * (1.0 + 1e-15)
    r = list(origin.r[keep])
    f = list(origin.f[keep])
    fr = list(origin.fr[keep])
    frr = list(origin.frr[keep])
    prov = list(origin.provenance[: len(r)])
    for i in range(len(out.r)):
        if out.r[i] > r[-1]:
            r.append(out.r[i])
            f.append(out.f[i])
            fr.append(out.fr[i])
            frr.append(out.frr[i])
            prov.append("integrator")
    return RadialProfile(
        params=params,
        r=np.array(r),
        f=np.array(f),
        fr=np.array(fr),
        frr=np.array(frr),
        provenance=tuple(prov),
        tol_scale=max(config.abs_tol, config.rel_tol),
    )


# ---------------------------------------------------------------------------
# the interior fixed-point route
# ---------------------------------------------------------------------------

_INTERIOR_GUARD = 1.0 / 3.0


def default_window(r1: float, a0: float, b0: float) -> ExtensionWindow:
    """Window with the adaptive width min(1/3, a1 / (4 (M + r0' + 1)))."""
    a1 = r1 * b0 - a0
    if a1 <= 0.0:
        raise DomainError("cannot open a window where r1 b0 - a0 <= 0")
    m_bound = max(abs(a0), abs(b0))
    delta = min(1.0 / 3.0, a1 / (4.0 * (m_bound + r1 + 1.0 / 3.0 + 1.0)))
    return ExtensionWindow(r1=r1, a0=a0, b0=b0, a1=a1, delta=delta)


def extend_picard(
    params: Parameters,
    window: ExtensionWindow,
    config: SolverConfig | None = None,
    *,
    guard: float = _INTERIOR_GUARD,
) -> SegmentSolution:
    """Fixed-point solve on [r1, r1 + delta], halving delta on failure."""
    config = config or SolverConfig()
    validate(params)
    n, lam = params.n, params.lam
    r1, a0, b0, a1 = window.r1, window.a0, window.b0, window.a1
    delta = window.delta
    abs_tol = config.abs_tol
    floor = 64.0 * np.finfo(float).eps * max(1.0, abs(a0), abs(b0))

    last: Exception | None = None
    for restart in range(40):
        m = max(129, int(math.ceil(delta / abs_tol ** 0.25)) + 1)
        s = np.linspace(r1, r1 + delta, m)
        dx = delta / (m - 1)
        g = np.full(m, a0)
        h = np.full(m, b0)
        distances: list[float] = []
        converged = failed = False
        try:
            for _ in range(config.picard_max_iter):
                den = s * h - g
                if np.any(den <= 0.5 * a1):
                    raise DenominatorCollapse(
                        f"s h - g fell below a1/2 = {0.5 * a1} in the window at r1={r1}"
                    )
                one_h2 = 1.0 + h * h
                core = cumulative_simpson_uniform(s * one_h2 * one_h2 / den, dx) / lam
                cum_h = cumulative_simpson_uniform(h, dx)
                cum_h3 = cumulative_simpson_uniform(h ** 3, dx)
                g_new = a0 + cum_h
                h_new = (core - (n - 1) * cum_h3 - (n - 2) * cum_h) / s + (r1 / s) * b0
                d = max(float(np.max(np.abs(g_new - g))), float(np.max(np.abs(h_new - h))))
                distances.append(d)
                g, h = g_new, h_new
                if d <= abs_tol:
                    converged = True
                    break
        except DenominatorCollapse as err:
            last = err
            failed = True

        ratios = [
            distances[k + 1] / distances[k]
            for k in range(max(0, len(distances) - 7), len(distances) - 1)
            if distances[k] > floor and distances[k + 1] > floor
        ]
        ratio = max(ratios) if ratios else 0.0
        if not failed and converged and ratio <= guard:
            diag = WindowDiagnostics(
                iterations=len(distances),
                distances=tuple(distances),
                observed_ratio=ratio,
                delta_final=delta,
                restarts=restart,
            )
            return SegmentSolution(r=s, f=g, fr=h, diagnostics=diag)
        if not failed:
            last = NoConvergence(
                f"window ratio {ratio:.3f} above guard {guard:.3f}",
                eps=delta,
                ratio=ratio,
            )
        delta *= 0.5

    raise NoConvergence(f"window at r1={r1} failed: {last}", eps=delta)


def extend_picard_chain(
    params: Parameters,
    r1: float,
    a0: float,
    b0: float,
    r_target: float,
    config: SolverConfig | None = None,
) -> tuple[SegmentSolution, list[WindowDiagnostics]]:
    """Chain interior windows from (r1, a0, b0) until r_target is covered.

    Returns a single stitched segment (last node exactly at r_target) and
    the per-window diagnostics.
    """
    config = config or SolverConfig()
    rs: list[np.ndarray] = []
    fs: list[np.ndarray] = []
    frs: list[np.ndarray] = []
    diags: list[WindowDiagnostics] = []
    r, f0, fr0 = r1, a0, b0
    while r < r_target * (1.0 - 1e-13):
        window = default_window(r, f0, fr0)
        if r + window.delta > r_target:
            window = ExtensionWindow(
                r1=r, a0=f0, b0=fr0, a1=window.a1, delta=r_target - r
            )
        seg = extend_picard(params, window, config)
        diags.append(seg.diagnostics)
        sl = slice(1 if rs else 0, None)
        rs.append(seg.r[sl])
        fs.append(seg.f[sl])
        frs.append(seg.fr[sl])
        r, f0, fr0 = float(seg.r[-1]), float(seg.f[-1]), float(seg.fr[-1])
    stitched = SegmentSolution(
        r=np.concatenate(rs), f=np.concatenate(fs), fr=np.concatenate(frs),
        diagnostics=diags[-1],
    )
    return stitched, diags


# ---------------------------------------------------------------------------
# monitors and identities
# ---------------------------------------------------------------------------


def detect_breakdown(params: Parameters, profile: RadialProfile) -> list[MonitorEvent]:
    """Scan stored nodes for w <= 0, f_r <= 0 or f_rr <= 0 (r > 0).

    One event is emitted per threshold crossing; an empty list is the pass
    certificate for the structural inequalities.
    """
    events: list[MonitorEvent] = []
    w = profile.w
    checks = (
        ("w_nonpositive", w),
        ("fr_nonpositive", profile.fr),
        ("frr_nonpositive", profile.frr),
    )
    for kind, arr in checks:
        prev_ok = True
        for i in range(1, len(profile)):
            ok = arr[i] > 0.0
            if not ok and prev_ok:
                events.append(
                    MonitorEvent(
                        kind,
                        float(profile.r[i]),
                        {
                            "f": float(profile.f[i]),
                            "fr": float(profile.fr[i]),
                            "frr": float(profile.frr[i]),
                            "w": float(w[i]),
                        },
                    )
                )
            prev_ok = ok
    events.sort(key=lambda e: e.r)
    return events


def w_identity_residuals(profile: RadialProfile) -> np.ndarray:
    """Defect of the denominator evolution identity at interior nodes.

    Along the flow, w = r f_r - f satisfies
    w_r = r (1+f_r^2) [ (1+f_r^2)/(lam w) - ((n-1)/r^2)(w + f) ],
    whose right-hand side collapses algebraically to r f_rr.  The residual
    compares a centered difference of stored w against r * f_rr and is
    normalized by the local scale (1 + |w_r|), making it O(step^2) small on
    a correct profile at any radius.
    """
    r, w, frr = profile.r, profile.w, profile.frr
    res = np.zeros(len(profile))
    for i in range(1, len(profile) - 1):
        h1 = r[i] - r[i - 1]
        h2 = r[i + 1] - r[i]
        dw = (
            w[i - 1] * (-h2 / (h1 * (h1 + h2)))
            + w[i] * ((h2 - h1) / (h1 * h2))
            + w[i + 1] * (h1 / (h2 * (h1 + h2)))
        )
        rhs = r[i] * frr[i]
        res[i] = abs(dw - rhs) / (1.0 + abs(rhs))
    return res[1:-1]


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------


def solve_profile(
    params: Parameters,
    config: SolverConfig | None = None,
    *,
    mode: str = "certified",
):
    """Origin construction plus outward continuation, in one call.

    Returns (profile, events, info) where info carries the fixed-point
    diagnostics and the integrator stats.
    """
    from .origin_picard import solve_origin

    config = config or SolverConfig()
    validate(params)
    if mode == "certified" and not params.global_regime:
        raise DomainError(
            f"certified mode needs lambda > 1/(n-1) = {1.0 / (params.n - 1)};"
            f" got lambda = {params.lam} (use exploratory mode instead)"
        )
    origin, diag = solve_origin(params, config)
    profile, events, stats = extend_rk(params, origin, config, mode=mode)
    info = {"picard": diag, "integrator": stats}
    return profile, events, info
