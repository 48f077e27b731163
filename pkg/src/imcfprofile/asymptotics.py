"""Slope ratio q(r) = r f_r(r) / f(r) and its large-radius limit.

For lambda > 1/(n-1) the ratio tends to alpha0 = lam (n-1) / (lam (n-1) - 1),
which is also the power-law exponent of f at infinity.  No convergence rate
is available a priori and the approach can be slow (the decay exponent
2 (alpha0 - 1) gets arbitrarily small as lam (n-1) grows), so the limit is
estimated by repeated three-point eliminations on geometrically spaced
samples, with the fitted decay removed level by level, and the spread of the
final eliminations reported as the uncertainty.  Radii where f <= 0 carry no
usable ratio and are excluded throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientRange, ZeroHeight
from .profile_core import Parameters, RadialProfile

__all__ = [
    "AsymptoticsReport",
    "alpha0",
    "q_of",
    "estimate_limit",
    "q_ode_residual",
    "q_band_exits",
]


def alpha0(params: Parameters) -> float:
    """The slope-ratio limit lam (n-1) / (lam (n-1) - 1); needs lam (n-1) > 1."""
    prod = params.lam * (params.n - 1)
    if prod <= 1.0:
        raise DomainError(
            f"slope-ratio limit needs lambda (n-1) > 1, got {prod}"
        )
    return prod / (prod - 1.0)


def q_of(profile: RadialProfile, r: float) -> float:
    """r f_r / f at radius r; raises :class:`ZeroHeight` near the zero of f."""
    pt = profile.at(r)
    floor = 1e3 * np.finfo(float).eps * (abs(r * pt.fr) + abs(profile.params.mu))
    if abs(pt.f) <= floor:
        raise ZeroHeight(f"|f({r})| = {abs(pt.f):.3e} below resolvable scale")
    return r * pt.fr / pt.f


@dataclass(frozen=True)
class AsymptoticsReport:
    alpha0: float
    q_samples: tuple[tuple[float, float], ...]
    q_limit_estimate: float
    extrapolation_uncertainty: float
    fit_exponent: float
    passed: bool


def _elimination_levels(qs: np.ndarray) -> list[np.ndarray]:
    """Repeated Aitken-style elimination on geometrically spaced samples.

    Each level removes the currently dominant power-law deviation; three
    levels are plenty for the grids used here.
    """
    levels = [np.asarray(qs, dtype=float)]
    while len(levels[-1]) >= 3 and len(levels) <= 3:
        prev = levels[-1]
        nxt = np.empty(prev.size - 2)
        for i in range(prev.size - 2):
            d1 = prev[i + 1] - prev[i]
            d2 = prev[i + 2] - prev[i + 1]
            den = d2 - d1
            if abs(den) <= 1e-14 * (abs(prev[i + 2]) + 1.0):
                nxt[i] = prev[i + 2]
            else:
                nxt[i] = prev[i + 2] - d2 * d2 / den
        levels.append(nxt)
    return levels


def estimate_limit(
    profile: RadialProfile,
    params: Parameters | None = None,
    *,
    samples: int = 9,
) -> AsymptoticsReport:
    """Limit estimate from log-spaced samples over the last two decades.

    Requires f > 0 over at least the last two decades of the profile.  The
    samples are taken at stored nodes (nearest to the log-uniform targets) so
    no interpolation error enters the elimination.
    """
    params = params or profile.params
    a0 = alpha0(params)
    r_max = profile.r_max
    if profile.f[-1] <= 0.0:
        raise InsufficientRange("f(r_max) <= 0; nothing to extrapolate")
    pos = np.nonzero(profile.f <= 0.0)[0]
    r_pos = profile.r[pos[-1] + 1] if pos.size else profile.r[1]
    if r_max < 100.0 * r_pos:
        raise InsufficientRange(
            f"need two decades with f > 0: f turns positive at {r_pos:.3g},"
            f" r_max = {r_max:.3g}"
        )

    # exact geometric radii: the three-point eliminations assume a constant
    # sample ratio, and the dense grid makes the interpolation error far
    # smaller than any q structure at these radii
    rs = np.geomspace(r_max / 100.0, r_max, samples)
    qs = np.array([q_of(profile, float(r)) for r in rs])

    levels = _elimination_levels(qs)
    deepest = levels[-1]
    estimate = float(deepest[-1])
    tails = []
    if deepest.size >= 2:
        tails.append(float(np.max(np.abs(np.diff(deepest[-3:])))))
    if len(levels) >= 2:
        tails.append(abs(float(levels[-2][-1]) - estimate))
    uncertainty = max(tails) if tails else abs(estimate - float(qs[-1]))

    decade = (profile.r >= r_max / 10.0) & (profile.f > 0.0)
    lr = np.log(profile.r[decade])
    lf = np.log(profile.f[decade])
    fit_exponent = float(np.polyfit(lr, lf, 1)[0])

    passed = abs(estimate - a0) <= max(3.0 * uncertainty, 1e-3)
    return AsymptoticsReport(
        alpha0=a0,
        q_samples=tuple((float(r), float(q)) for r, q in zip(rs, qs)),
        q_limit_estimate=estimate,
        extrapolation_uncertainty=float(uncertainty),
        fit_exponent=fit_exponent,
        passed=passed,
    )


def _q_rate(params: Parameters, q: float, fr: float) -> float:
    """Closed-form q_r * (r/q): (1+fr^2)(q(1+fr^-2)/(lam(q-1)) - (n-1)) + 1 - q.

    Grouped so the large-f_r near-cancellation is explicit: with
    beta = lam(n-1) - 1 > 0 the inner bracket equals
    (q/fr^2 - beta (q - alpha0)) / (lam (q-1)).
    """
    n, lam = params.n, params.lam
    fr2 = fr * fr
    beta = lam * (n - 1) - 1.0
    if beta > 0.0:
        a0 = lam * (n - 1) / beta
        inner = (q / fr2 - beta * (q - a0)) / (lam * (q - 1.0))
    else:
        inner = (q * (1.0 + 1.0 / fr2) - lam * (n - 1) * (q - 1.0)) / (lam * (q - 1.0))
    return (1.0 + fr2) * inner + 1.0 - q


def q_ode_residual(profile: RadialProfile, r: float, *, rel_stencil: float = 1e-3) -> float:
    """Defect of the autonomous-style slope-ratio equation at radius r.

    Compares a centered difference of q against the closed form
    q_r = (q/r) { (1+f_r^2) ( q (1+f_r^{-2}) / (lam (q-1)) - (n-1) ) + 1 - q }.
    Consistency (residual -> 0 as the stencil shrinks) is an independent
    check of the profile at large radius.
    """
    pt = profile.at(r)
    if pt.f <= 0.0 or pt.fr <= 0.0:
        raise ZeroHeight(f"q-equation residual needs f > 0 and f_r > 0 at r={r}")
    q = q_of(profile, r)
    if q <= 1.0:
        raise DomainError(f"q({r}) = {q} <= 1; outside the slope-ratio regime")
    dr = min(rel_stencil * r, 0.5 * (profile.r_max - r))
    if dr <= 32.0 * np.finfo(float).eps * r:
        raise DomainError(
            f"no room for a centered stencil at r = {r} (r_max = {profile.r_max})"
        )
    qp = q_of(profile, r + dr)
    qm = q_of(profile, r - dr)
    dq_dr = (qp - qm) / (2.0 * dr)
    return float(dq_dr - (q / r) * _q_rate(profile.params, q, pt.fr))


def q_band_exits(
    profile: RadialProfile, params: Parameters | None = None, *, eps_band: float = 0.05
) -> list[float]:
    """Radii where q exits [alpha0 - eps, alpha0 + eps] after first entering it.

    An empty list is the sandwich certificate on the sampled range.
    """
    params = params or profile.params
    a0 = alpha0(params)
    inside = False
    exits: list[float] = []
    for i in range(1, len(profile)):
        if profile.f[i] <= 0.0:
            continue
        q = profile.r[i] * profile.fr[i] / profile.f[i]
        if abs(q - a0) <= eps_band:
            inside = True
        elif inside:
            exits.append(float(profile.r[i]))
            inside = False
    return exits
