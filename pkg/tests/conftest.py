"""Shared fixtures: solved profiles are expensive, so cache them per session."""

import numpy as np
import pytest

from imcfprofile import Parameters, SolverConfig
from imcfprofile.continuation import solve_profile
from imcfprofile.origin_picard import solve_origin


def _key(params, r_max, mode):
    return (params.n, params.lam, params.mu, r_max, mode)


@pytest.fixture(scope="session")
def solved_cache():
    cache = {}

    def get(n, lam, mu, r_max=1e4, mode="certified", tol=1e-12, extra=(0.5, 1.0)):
        key = (n, lam, mu, r_max, mode, tol)
        if key not in cache:
            params = Parameters(n, lam, mu)
            config = SolverConfig(
                abs_tol=tol,
                rel_tol=tol * 100.0,
                r_max=r_max,
                extra_radii=tuple(p for p in extra if p < r_max),
            )
            cache[key] = solve_profile(params, config, mode=mode)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def origin_cache():
    cache = {}

    def get(n, lam, mu, tol=1e-12):
        key = (n, lam, mu, tol)
        if key not in cache:
            params = Parameters(n, lam, mu)
            cache[key] = solve_origin(params, SolverConfig(abs_tol=tol, rel_tol=tol * 100))
        return cache[key]

    return get


@pytest.fixture
def quadratic_profile():
    """Synthetic exact datum f(r) = -1 + r^2/4 with its true derivatives."""
    from imcfprofile.profile_core import RadialProfile

    params = Parameters(2, 1.0, -1.0)
    r = np.linspace(0.0, 1.0, 101)
    return RadialProfile(
        params=params,
        r=r,
        f=-1.0 + 0.25 * r ** 2,
        fr=0.5 * r,
        frr=np.full_like(r, 0.5),
        provenance=tuple("origin-series" for _ in r),
    )
