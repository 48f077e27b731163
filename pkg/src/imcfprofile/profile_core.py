"""Parameter and profile data model shared by every other module.

The central object of the library is the radially symmetric profile f of a
self-similarly expanding graph moving by inverse mean curvature, solving

    f_rr + ((n-1)/r) (1 + f_r^2) f_r - (1/lambda) (1 + f_r^2)^2 / (r f_r - f) = 0,
    f(0) = mu < 0,   f_r(0) = 0.

The quantity w = r f_r - f is the denominator of the curvature term; w > 0
is the solvability condition and everything downstream monitors it.  For
lambda > 1/(n-1) the solution is global with f_r > 0, f_rr > 0, w > 0 and
r f_r / f -> lambda (n-1) / (lambda (n-1) - 1); this module only owns the
data model and the pointwise pieces (right-hand side, interpolation), the
solving lives in ``origin_picard`` and ``continuation``.

All types are immutable after construction and safe to share across threads;
the operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfRange, SingularDenominator, SingularRadius

__all__ = [
    "Parameters",
    "ProfilePoint",
    "RadialProfile",
    "SolverConfig",
    "validate",
    "ode_rhs",
    "origin_curvature",
]


def origin_curvature(n: int, lam: float, mu: float) -> float:
    """Curvature of the profile on the axis: lim_{r->0} f_rr = 1/(n lambda |mu|)."""
    return 1.0 / (n * lam * abs(mu))


@dataclass(frozen=True)
class Parameters:
    """The triple (n, lambda, mu) defining a profile instance.

    ``global_regime`` is true iff lambda > 1/(n-1), the regime in which the
    profile exists globally with all structural inequalities strict.  Use
    :func:`validate` to construct checked instances.
    """

    n: int
    lam: float
    mu: float

    @property
    def global_regime(self) -> bool:
        return self.lam * (self.n - 1) > 1.0

    @property
    def frr0(self) -> float:
        """f_rr at the origin, 1/(n lambda |mu|)."""
        return origin_curvature(self.n, self.lam, self.mu)


def validate(params: Parameters) -> Parameters:
    """Check the admissibility of a parameter triple.

    Raises :class:`DomainError` unless n >= 2 (integer), lambda > 0 and
    mu < 0.  Returns the (unchanged, already annotated) parameters, so
    ``validate(validate(p)) == validate(p)``.
    """
    if int(params.n) != params.n or params.n < 2:
        raise DomainError(f"dimension n must be an integer >= 2, got {params.n}")
    if not (params.lam > 0.0) or not np.isfinite(params.lam):
        raise DomainError(f"lambda must be a positive real, got {params.lam}")
    if not (params.mu < 0.0) or not np.isfinite(params.mu):
        raise DomainError(f"mu must be a negative real, got {params.mu}")
    return params


def ode_rhs(params: Parameters, r: float, f: float, fr: float) -> float:
    """Second derivative from the profile equation at a single point.

    frr = (1/lambda) (1+fr^2)^2 / (r fr - f)  -  ((n-1)/r) (1+fr^2) fr

    Raises :class:`SingularRadius` for r <= 0 and
    :class:`SingularDenominator` when w = r fr - f <= 0.

    At large radii the two terms nearly cancel, so the evaluation carries an
    intrinsic rounding floor of order eps * (1+fr^2)^2 / (lambda w); checks
    against this value must budget for that floor (see ``verify``).
    """
    if r <= 0.0:
        raise SingularRadius(f"ode_rhs needs r > 0, got r={r}")
    w = r * fr - f
    if w <= 0.0:
        raise SingularDenominator(f"w = r f_r - f = {w} <= 0 at r={r}")
    s = 1.0 + fr * fr
    return (s * s) / (params.lam * w) - (params.n - 1) / r * s * fr


def _rhs_rounding_floor(params: Parameters, r: float, f: float, fr: float) -> float:
    """Size of the dominant term of ode_rhs; eps times this is the noise floor."""
    w = r * fr - f
    s = 1.0 + fr * fr
    t1 = (s * s) / (params.lam * abs(w)) if w != 0.0 else np.inf
    t2 = (params.n - 1) / r * s * abs(fr)
    return max(t1, t2)


@dataclass(frozen=True)
class ProfilePoint:
    """One sample (r, f, f_r, f_rr) of a profile."""

    r: float
    f: float
    fr: float
    frr: float

    @property
    def w(self) -> float:
        return self.r * self.fr - self.f

    @property
    def q(self) -> float:
        return self.r * self.fr / self.f


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and layout knobs for the solve pipeline.

    * ``abs_tol`` / ``rel_tol``: fixed-point distance tolerance and per-step
      integration error control.
    * ``r_switch``: handoff radius from the origin construction to the
      outward integrator; ``None`` means 0.1 * min(1, |mu|), clipped to the
      interval the origin construction actually certified.
    * ``picard_max_iter`` / ``picard_contraction_guard``: iteration budget
      and the observed-ratio threshold above which the interval is halved
      and the iteration restarted.
    * ``output_grid``: "log", "uniform" or "native" node placement for the
      integrated segment; ``grid_density`` is nodes per decade (log) or the
      spacing divisor (uniform).
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    r_switch: float | None = None
    picard_max_iter: int = 200
    picard_contraction_guard: float = 2.0 / 3.0
    r_max: float = 1e4
    output_grid: str = "log"
    grid_density: int = 192
    extra_radii: tuple[float, ...] = ()

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise DomainError("tolerances must be positive")
        if self.r_switch is not None and not (0.0 < self.r_switch <= self.r_max):
            raise DomainError("need 0 < r_switch <= r_max")
        if not (0.0 < self.picard_contraction_guard < 1.0):
            raise DomainError("contraction guard must lie in (0, 1)")
        if self.output_grid == "adaptive-native":
            object.__setattr__(self, "output_grid", "native")
        if self.output_grid not in ("log", "uniform", "native"):
            raise DomainError(f"unknown output_grid policy {self.output_grid!r}")

    def resolved_r_switch(self, params: Parameters) -> float:
        if self.r_switch is not None:
            return self.r_switch
        return 0.1 * min(1.0, abs(params.mu))


def _hermite(t: np.ndarray | float, h: float, y0, d0, y1, d1):
    """Cubic Hermite on [0, h] with values y and derivatives d at the ends."""
    u = t / h
    u2 = u * u
    u3 = u2 * u
    return (
        (2 * u3 - 3 * u2 + 1) * y0
        + (u3 - 2 * u2 + u) * h * d0
        + (-2 * u3 + 3 * u2) * y1
        + (u3 - u2) * h * d1
    )


@dataclass(frozen=True)
class RadialProfile:
    """A sampled profile with strictly increasing radii, points[0] at r = 0.

    ``f`` and ``fr`` are the stored solver output; ``frr`` at each node is
    the curvature the solver derived from the equation (never interpolated).
    ``provenance`` maps each node to the stage that produced it
    ("origin-series", "picard" or "integrator").
    """

    params: Parameters
    r: np.ndarray
    f: np.ndarray
    fr: np.ndarray
    frr: np.ndarray
    provenance: tuple[str, ...]
    tol_scale: float = 1e-12

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.size < 2:
            raise DomainError("profile needs at least two samples")
        if r[0] != 0.0:
            raise DomainError("profile must start at r = 0")
        if not np.all(np.diff(r) > 0.0):
            raise DomainError("radii must be strictly increasing")
        if self.fr[0] != 0.0 or self.f[0] != self.params.mu:
            raise DomainError("profile must carry f(0) = mu, f_r(0) = 0 exactly")
        for name in ("r", "f", "fr", "frr"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def w(self) -> np.ndarray:
        return self.r * self.fr - self.f

    def __len__(self) -> int:
        return int(self.r.size)

    def _bracket(self, r: float) -> int:
        i = int(np.searchsorted(self.r, r, side="right") - 1)
        return min(max(i, 0), self.r.size - 2)

    def at(self, r: float) -> ProfilePoint:
        """Evaluate the profile at radius ``r`` in [0, r_max].

        Between nodes, f is the cubic Hermite through the bracketing
        (f, f_r) data and f_r the cubic Hermite through (f_r, f_rr); the
        returned f_rr is recomputed from the equation.  On a node the stored
        sample is returned exactly, and at r = 0 the curvature is the exact
        axis value 1/(n lambda |mu|).
        """
        if r < 0.0:
            raise OutOfRange(f"negative radius {r}")
        if r > self.r_max * (1.0 + 1e-12):
            raise OutOfRange(f"r={r} beyond sampled range r_max={self.r_max}")
        r = min(r, self.r_max)
        idx = int(np.searchsorted(self.r, r))
        if idx < self.r.size and self.r[idx] == r:
            return ProfilePoint(r, float(self.f[idx]), float(self.fr[idx]), float(self.frr[idx]))
        i = self._bracket(r)
        h = float(self.r[i + 1] - self.r[i])
        t = r - float(self.r[i])
        f = float(_hermite(t, h, self.f[i], self.fr[i], self.f[i + 1], self.fr[i + 1]))
        fr = float(_hermite(t, h, self.fr[i], self.frr[i], self.fr[i + 1], self.frr[i + 1]))
        return ProfilePoint(r, f, fr, ode_rhs(self.params, r, f, fr))

    def consistency_tolerance(self, i: int) -> float:
        """Self-consistency budget for node i: solver tolerance plus the
        rounding floor of evaluating the right-hand side there."""
        if i == 0:
            return self.tol_scale
        floor = _rhs_rounding_floor(
            self.params, float(self.r[i]), float(self.f[i]), float(self.fr[i])
        )
        return self.tol_scale * max(1.0, abs(float(self.frr[i]))) + 64 * np.finfo(float).eps * floor
