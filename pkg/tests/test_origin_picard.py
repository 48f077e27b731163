"""The origin fixed-point construction and the power-series bootstrap."""

import numpy as np
import pytest

from imcfprofile import Parameters
from imcfprofile.origin_picard import (
    PicardState,
    phi_step,
    picard_residual_max,
    series_coefficients,
    series_eval,
    solve_origin,
    taylor_bootstrap,
    trust_radius,
    weighted_distance,
)


def _constant_state(params, eps, m=513):
    return PicardState(eps, np.full(m, params.mu), np.zeros(m))


class TestPhiStep:
    def test_constant_input_closed_form(self):
        """Seed (mu, 0): Phi_1 = mu identically and Phi_2(r) = r/(n lam |mu|).

        For n >= 4 the inner moment integral has a first-order startup bias
        at the first few odd nodes (its integrand vanishes like s^{n-1});
        even nodes, the only ones the solver's assembly consumes, are exact.
        """
        for n, lam, mu in [(2, 1.0, -1.0), (3, 2.0, -0.5), (4, 1.5, -2.0)]:
            params = Parameters(n, lam, mu)
            # eps small enough that the image stays inside the trust ball:
            # sup s^{-1/2} Phi_2 = sqrt(eps)/(n lam |mu|) <= eta
            eps = min(0.2, 0.5 * (trust_radius(params) * n * lam * abs(mu)) ** 2)
            state = _constant_state(params, eps)
            out = phi_step(params, state)
            assert np.max(np.abs(out.g - mu)) < 1e-14
            expected = state.grid / (n * lam * abs(mu))
            err = np.abs(out.h - expected)
            assert np.max(err[::2]) < 1e-12
            if n <= 3:
                assert np.max(err) < 1e-12

    def test_constant_input_spot_value(self):
        """(2, 1, -1) at r = 0.1: Phi_2 = 0.05."""
        params = Parameters(2, 1.0, -1.0)
        state = _constant_state(params, 0.1)
        out = phi_step(params, state)
        assert out.h[-1] == pytest.approx(0.05, abs=1e-13)

    def test_contraction_factor_in_ball(self):
        """Two distinct in-ball states contract by at least 2/3 at small eps."""
        params = Parameters(2, 1.0, -1.0)
        eps = 0.05
        m = 2049
        s = np.linspace(0.0, eps, m)
        eta = trust_radius(params)
        rng = np.random.default_rng(3)

        def random_state():
            # g near mu, h with finite weighted norm, inside the eta-ball
            amp_g = eta * rng.uniform(0.1, 0.8)
            amp_h = eta * rng.uniform(0.1, 0.8)
            g = params.mu + amp_g * np.sin(2.0 + 5.0 * s)
            h = amp_h * np.sqrt(s) * (0.3 + 0.6 * np.cos(3.0 * s))
            return PicardState(eps, g, h)

        for _ in range(5):
            s1, s2 = random_state(), random_state()
            lhs = weighted_distance(phi_step(params, s1), phi_step(params, s2))
            rhs = weighted_distance(s1, s2)
            assert lhs <= (2.0 / 3.0) * rhs


class TestSolveOrigin:
    @pytest.mark.parametrize(
        "n, lam, mu, limit",
        [(2, 1.0, -1.0, 0.5), (3, 2.0, -0.5, 1.0 / 3.0)],
    )
    def test_axis_slope_limit(self, n, lam, mu, limit, origin_cache):
        profile, _ = origin_cache(n, lam, mu)
        r = 1e-3
        pt = profile.at(r)
        assert abs(pt.fr / r - limit) <= 1e-6

    def test_distances_decay_geometrically(self, origin_cache):
        _, diag = origin_cache(2, 1.0, -1.0)
        assert diag.converged
        assert all(d > 0.0 for d in diag.distances)
        assert diag.observed_ratio <= 2.0 / 3.0

    def test_denominator_lower_bound(self, origin_cache):
        """s h - g >= |mu|/2 at every node of the accepted iterate."""
        for args in [(2, 1.0, -1.0), (3, 2.0, -0.5)]:
            _, diag = origin_cache(*args)
            state = diag.state
            den = state.grid * state.h - state.g
            assert np.min(den) >= abs(args[2]) / 2.0

    def test_pointwise_residual(self, origin_cache):
        """The accepted iterate satisfies the equation to 10x the tolerance."""
        params = Parameters(2, 1.0, -1.0)
        _, diag = origin_cache(2, 1.0, -1.0)
        assert picard_residual_max(params, diag.state) <= 10.0 * 1e-12

    def test_picard_agrees_with_series(self, origin_cache):
        """Two independent local constructions of the same solution."""
        params = Parameters(2, 1.0, -1.0)
        profile, diag = origin_cache(2, 1.0, -1.0)
        coeffs = series_coefficients(params, 16)
        for r in (0.01, 0.05, min(0.12, profile.r_max)):
            f_s, fr_s = series_eval(coeffs, r)
            pt = profile.at(r)
            assert abs(pt.f - f_s) <= 1e-11
            assert abs(pt.fr - fr_s) <= 1e-11


class TestTaylorBootstrap:
    def test_forced_coefficients(self):
        c = taylor_bootstrap(Parameters(2, 1.0, -1.0), 6)
        assert c[0] == -1.0
        assert c[1] == 0.0
        assert c[2] == pytest.approx(0.25)

    @pytest.mark.parametrize("n, lam, mu", [(2, 1.0, -1.0), (3, 2.5, -0.7), (5, 0.8, -2.0)])
    def test_a3_vanishes(self, n, lam, mu):
        c = taylor_bootstrap(Parameters(n, lam, mu), 5)
        assert abs(c[3]) < 1e-15

    def test_a4_value_and_balance(self):
        """a4 = 1/128 for (2,1,-1); general order-r^2 balance
        (4n+8) a4 = (8n+8) a2^3 - 2n a2^2/|mu| cross-checked."""
        c = taylor_bootstrap(Parameters(2, 1.0, -1.0), 4)
        assert c[4] == pytest.approx(1.0 / 128.0, rel=1e-14)
        for n, lam, mu in [(2, 1.0, -1.0), (3, 1.5, -0.5), (4, 2.0, -3.0)]:
            c = taylor_bootstrap(Parameters(n, lam, mu), 4)
            a2 = c[2]
            balance = ((8 * n + 8) * a2 ** 3 - 2 * n * a2 ** 2 / abs(mu)) / (4 * n + 8)
            assert c[4] == pytest.approx(balance, rel=1e-12)

    def test_order_too_low_rejected(self):
        from imcfprofile import DomainError

        with pytest.raises(DomainError):
            taylor_bootstrap(Parameters(2, 1.0, -1.0), 1)

    def test_even_parity_up_to_computed_order(self):
        c = taylor_bootstrap(Parameters(3, 2.0, -1.5), 11)
        odd = c[1::2]
        assert np.max(np.abs(odd)) < 1e-14
