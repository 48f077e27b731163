"""Construction of the profile on an initial interval [0, eps].

Two independent routes are provided and must agree:

* :func:`solve_origin` iterates the integral-operator reformulation of the
  initial value problem.  A candidate pair (g, h) ~ (f, f_r) on [0, eps] is
  mapped to

      Phi_1(g,h)(r) = mu + int_0^r h(s) ds
      Phi_2(g,h)(r) = (1/r) { E(r) - ((n-2)/r^{n-2}) int_0^r rho^{n-3} E(rho) drho }
      E(g,h)(r)     = (1/lam) int_0^r s (1+h^2)^2 / (s h - g) ds
                      - (n-1) int_0^r h^3 ds

  which contracts (factor <= 2/3 for small enough eps) on the ball of radius
  eta = |mu|/4 around the constant state (mu, 0) in the norm
  max( sup|g| , sup s^{-1/2} |h(s)| ).  The interval is halved and the
  iteration restarted whenever an iterate escapes the ball, the denominator
  s h - g collapses, or the observed contraction ratio exceeds the guard.

* :func:`taylor_bootstrap` expands f(r) = sum a_k r^k and determines the
  coefficients by formal substitution into the equation; the first few are
  forced: a_0 = mu, a_1 = 0, a_2 = 1/(2 n lam |mu|).

Quadratures are composite Simpson on the uniform iteration grid, sized so
the quadrature error sits below the fixed-point tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BallEscape, DenominatorCollapse, DomainError, NoConvergence
from .profile_core import Parameters, RadialProfile, SolverConfig, ode_rhs, validate
from .quadrature import cumulative_simpson_uniform

__all__ = [
    "PicardState",
    "PicardDiagnostics",
    "phi_step",
    "solve_origin",
    "taylor_bootstrap",
    "series_coefficients",
    "series_eval",
    "trust_radius",
    "weighted_distance",
    "picard_residual_max",
]

_MAX_RESTARTS = 48
_GRID_CAP = 1 << 21


def trust_radius(params: Parameters) -> float:
    """Radius eta = |mu|/4 of the iteration ball around (mu, 0)."""
    return 0.25 * abs(params.mu)


@dataclass(frozen=True)
class PicardState:
    """A candidate pair (g, h) ~ (f, f_r) sampled uniformly on [0, eps]."""

    eps: float
    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        if self.g.shape != self.h.shape or self.g.ndim != 1 or self.g.size < 3:
            raise DomainError("PicardState needs matching 1-d g, h with >= 3 nodes")
        self.g.setflags(write=False)
        self.h.setflags(write=False)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.eps, self.g.size)

    @property
    def spacing(self) -> float:
        return self.eps / (self.g.size - 1)

    def weighted_norm_from(self, mu: float) -> float:
        """max(sup|g - mu|, sup_{s>0} s^{-1/2}|h|); the s=0 node is excluded."""
        s = self.grid[1:]
        return max(
            float(np.max(np.abs(self.g - mu))),
            float(np.max(np.abs(self.h[1:]) / np.sqrt(s))),
        )


def weighted_distance(a: PicardState, b: PicardState) -> float:
    """Distance in the max(sup-norm, weighted sup-norm) metric."""
    if a.g.size != b.g.size or a.eps != b.eps:
        raise DomainError("states live on different grids")
    s = a.grid[1:]
    dg = float(np.max(np.abs(a.g - b.g)))
    dh = float(np.max(np.abs(a.h[1:] - b.h[1:]) / np.sqrt(s)))
    return max(dg, dh)


@dataclass(frozen=True)
class PicardDiagnostics:
    """Convergence record of one accepted origin solve.

    ``state`` is the accepted fixed-point iterate on the full iteration
    grid, kept for residual diagnostics.
    """

    iterations: int
    distances: tuple[float, ...]
    observed_ratio: float
    converged: bool
    eps_final: float
    restarts: int
    state: PicardState | None = None


def picard_residual_max(params: Parameters, state: PicardState, *, stride: int = 8) -> float:
    """Pointwise equation residual of a fixed-point iterate on (0, eps].

    Differentiates h on the iteration grid (centered, with a stride chosen
    to balance truncation against rounding) and compares with the equation's
    right-hand side evaluated from (s, g, h).
    """
    s = state.grid
    g, h = state.g, state.h
    k = stride
    if s.size < 2 * k + 3:
        k = max(1, (s.size - 3) // 2)
    sl = slice(k, -k)
    fd = (h[2 * k:] - h[:-2 * k]) / (s[2 * k:] - s[:-2 * k])
    si, gi, hi = s[sl], g[sl], h[sl]
    w = si * hi - gi
    one_h2 = 1.0 + hi * hi
    rhs = one_h2 * one_h2 / (params.lam * w) - (params.n - 1) / si * one_h2 * hi
    return float(np.max(np.abs(fd - rhs)))


def phi_step(params: Parameters, state: PicardState) -> PicardState:
    """One application of the integral operator (Phi_1, Phi_2).

    Raises :class:`DenominatorCollapse` if s h - g <= 0 at a node and
    :class:`BallEscape` if the image leaves the trust ball.
    """
    n, lam, mu = params.n, params.lam, params.mu
    s = state.grid
    dx = state.spacing
    g, h = state.g, state.h

    eta = trust_radius(params)
    in_norm = state.weighted_norm_from(mu)
    if in_norm > eta:
        raise BallEscape(f"input state norm {in_norm:.3e} exceeds eta = {eta:.3e}")
    den = s * h - g
    if np.any(den <= 0.0):
        k = int(np.argmax(den <= 0.0))
        raise DenominatorCollapse(f"s h - g = {den[k]} <= 0 at s = {s[k]}")

    one_h2 = 1.0 + h * h
    e_core = cumulative_simpson_uniform(s * one_h2 * one_h2 / den, dx) / lam
    e = e_core - (n - 1) * cumulative_simpson_uniform(h ** 3, dx)

    phi1 = mu + cumulative_simpson_uniform(h, dx)

    phi2 = np.zeros_like(h)
    if n == 2:
        # the (n-2) correction vanishes; Phi_2 = E / r
        phi2[1:] = e[1:] / s[1:]
    else:
        integrand = np.zeros_like(e)
        integrand[1:] = s[1:] ** (n - 3) * e[1:]
        inner = cumulative_simpson_uniform(integrand, dx)
        phi2[1:] = (e[1:] - (n - 2) * inner[1:] / s[1:] ** (n - 2)) / s[1:]

    out = PicardState(state.eps, phi1, phi2)
    norm = out.weighted_norm_from(mu)
    if norm > eta:
        raise BallEscape(f"iterate norm {norm:.3e} exceeds eta = {eta:.3e}")
    return out


def _grid_points(eps: float, abs_tol: float) -> int:
    """Node count: ~eps/sqrt(abs_tol) intervals, power of two, at least 64."""
    n = max(64, int(np.ceil(eps / np.sqrt(abs_tol))))
    return min(1 << int(np.ceil(np.log2(n))), _GRID_CAP)


def _observed_ratio(distances: list[float], floor: float) -> float:
    ratios = [
        distances[k + 1] / distances[k]
        for k in range(max(0, len(distances) - 7), len(distances) - 1)
        if distances[k] > floor and distances[k + 1] > floor
    ]
    return max(ratios) if ratios else 0.0


def solve_origin(
    params: Parameters, config: SolverConfig | None = None
) -> tuple[RadialProfile, PicardDiagnostics]:
    """Fixed-point solve on [0, eps], eps adaptively halved from min(1, |mu|/4).

    The returned profile carries a dyadic ladder of nodes eps/2^j (for the
    axis-limit diagnostics) merged with a uniform subsample; s h - g >= |mu|/2
    holds at every node of the accepted iterate.
    """
    config = config or SolverConfig()
    validate(params)
    mu = params.mu
    abs_tol = config.abs_tol
    eps = min(1.0, abs(mu) / 4.0)
    guard = config.picard_contraction_guard
    floor = 64.0 * np.finfo(float).eps * max(1.0, abs(mu))

    last_error: Exception | None = None
    for restart in range(_MAX_RESTARTS):
        m = _grid_points(eps, abs_tol) + 1
        state = PicardState(eps, np.full(m, mu), np.zeros(m))
        distances: list[float] = []
        converged = False
        failed = False
        try:
            for _ in range(config.picard_max_iter):
                new = phi_step(params, state)
                d = weighted_distance(new, state)
                distances.append(d)
                state = new
                if d <= abs_tol:
                    converged = True
                    break
        except (BallEscape, DenominatorCollapse) as err:
            last_error = err
            failed = True

        ratio = _observed_ratio(distances, floor)
        if not failed and converged and ratio <= guard:
            diag = PicardDiagnostics(
                iterations=len(distances),
                distances=tuple(distances),
                observed_ratio=ratio,
                converged=True,
                eps_final=eps,
                restarts=restart,
                state=state,
            )
            return _assemble_profile(params, state, config), diag
        if not failed:
            last_error = NoConvergence(
                f"ratio {ratio:.3f} above guard {guard:.3f}"
                if ratio > guard
                else f"no convergence in {config.picard_max_iter} iterations",
                eps=eps,
                ratio=ratio,
            )
        eps *= 0.5

    raise NoConvergence(
        f"origin solve failed after {_MAX_RESTARTS} restarts: {last_error}",
        eps=eps,
        ratio=getattr(last_error, "ratio", None),
    )


def _assemble_profile(
    params: Parameters, state: PicardState, config: SolverConfig
) -> RadialProfile:
    m = state.g.size
    n_int = m - 1
    idx = {0, n_int}
    step = max(1, n_int // 64)
    idx.update(range(step, n_int, step))
    j = 1
    while n_int >> j >= 8 and j <= 14:
        idx.add(n_int >> j)
        j += 1
    order = sorted(idx)

    s = state.grid
    r = s[order]
    f = state.g[order]
    fr = state.h[order]
    frr = np.empty_like(r)
    frr[0] = params.frr0
    for k in range(1, r.size):
        frr[k] = ode_rhs(params, float(r[k]), float(f[k]), float(fr[k]))
    prov = tuple("picard" for _ in order)
    return RadialProfile(
        params=params,
        r=r,
        f=f,
        fr=fr.copy(),
        frr=frr,
        provenance=prov,
        tol_scale=config.abs_tol,
    )


# ---------------------------------------------------------------------------
# power-series bootstrap
# ---------------------------------------------------------------------------


def _poly_mul(a: list, b: list, length: int) -> list:
    zero = a[0] * 0
    out = [zero] * length
    for i, ai in enumerate(a[:length]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: length - i]):
            if bj != 0:
                out[i + j] = out[i + j] + ai * bj
    return out


def _residual_coefficient(coeffs: list, n: int, inv_lam, length: int) -> list:
    """Coefficients of r (r f'-f) f'' + (n-1)(1+f'^2) f' (r f'-f) - (r/lam)(1+f'^2)^2."""
    zero = coeffs[0] * 0
    one = zero + 1
    fp = [(k + 1) * coeffs[k + 1] for k in range(len(coeffs) - 1)]
    fpp = [(k + 1) * (k + 2) * coeffs[k + 2] for k in range(len(coeffs) - 2)]
    # w = r f' - f as a series in r
    w = [(k - 1) * coeffs[k] for k in range(len(coeffs))]
    w[0] = -coeffs[0]
    if len(coeffs) > 1:
        w[1] = zero

    fp2 = _poly_mul(fp, fp, length)
    one_fp2 = [one + fp2[0]] + fp2[1:]
    term1 = _poly_mul(w, fpp, length)
    term1 = [zero] + term1[: length - 1]  # multiply by r
    term2 = _poly_mul(_poly_mul(one_fp2, fp, length), w, length)
    term2 = [(n - 1) * c for c in term2]
    term3 = _poly_mul(one_fp2, one_fp2, length)
    term3 = [zero] + [inv_lam * c for c in term3[: length - 1]]  # times r / lam
    return [term1[k] + term2[k] - term3[k] for k in range(length)]


def series_coefficients(params: Parameters, order: int, *, number=float) -> list:
    """Profile series coefficients a_0..a_order by formal substitution.

    ``number`` converts python scalars into the working arithmetic (float by
    default; pass e.g. ``mpmath.mpf`` for the extended-precision oracle).
    The recursion matches the coefficient of r^{m-1} in the cleared equation,
    in which a_m enters as m (m + n - 2) |mu| a_m.
    """
    if order < 2:
        raise DomainError("series order must be at least 2")
    validate(params)
    n = params.n
    mu = number(params.mu)
    inv_lam = 1 / number(params.lam)
    coeffs = [mu, mu * 0, inv_lam / (2 * n * abs(mu))]
    for m in range(3, order + 1):
        coeffs.append(mu * 0)
        res = _residual_coefficient(coeffs, n, inv_lam, m)
        coeffs[m] = -res[m - 1] / (m * (m + n - 2) * abs(mu))
    return coeffs


def taylor_bootstrap(params: Parameters, order: int) -> np.ndarray:
    """Float coefficients of f(r) = sum a_k r^k near the axis."""
    return np.array(series_coefficients(params, order, number=float), dtype=float)


def series_eval(coeffs, r):
    """Evaluate a coefficient sequence and its derivative at radius r (Horner)."""
    f = coeffs[0] * 0
    fr = coeffs[0] * 0
    for a in reversed(coeffs):
        fr = fr * r + f
        f = f * r + a
    return f, fr
