"""Outward continuation: the adaptive march, interior windows, monitors."""

import numpy as np
import pytest

from imcfprofile import DomainError, Parameters, RadialProfile, SolverConfig
from imcfprofile.continuation import (
    ExtensionWindow,
    default_window,
    detect_breakdown,
    extend_picard,
    extend_picard_chain,
    extend_rk,
    solve_profile,
    w_identity_residuals,
)

class TestExtendRk:
    def test_zero_length_extension(self, origin_cache):
        params = Parameters(2, 2.0, -1.0)
        origin, _ = origin_cache(2, 2.0, -1.0)
        # r_max equal to the handoff: nothing to march
        config = SolverConfig(r_switch=0.1, r_max=0.1)
        prof, events, stats = extend_rk(params, origin, config)
        assert prof is origin
        assert events == []

    def test_invariants_hold_certified(self, solved_cache):
        prof, events, info = solved_cache(2, 2.0, -1.0, r_max=10.0)
        assert events == []
        w = prof.w
        assert np.all(prof.fr[1:] > 0.0)
        assert np.all(prof.frr[1:] > 0.0)
        assert np.all(w > 0.0)

    def test_certified_mode_requires_regime(self, origin_cache):
        params = Parameters(2, 1.0, -1.0)
        origin, _ = origin_cache(2, 1.0, -1.0)
        with pytest.raises(DomainError):
            extend_rk(params, origin, SolverConfig(r_max=2.0), mode="certified")

    def test_cross_method_agreement_at_r1(self, solved_cache, origin_cache):
        """extend_rk vs chained interior windows at r = 1 for (2, 2, -1)."""
        params = Parameters(2, 2.0, -1.0)
        config = SolverConfig(extra_radii=(0.5, 1.0), r_max=10.0)
        origin, _ = origin_cache(2, 2.0, -1.0)
        prof, _, _ = solved_cache(2, 2.0, -1.0, r_max=10.0)
        r1 = min(config.resolved_r_switch(params), origin.r_max)
        start = origin.at(r1)
        seg, diags = extend_picard_chain(params, r1, start.f, start.fr, 1.0, config)
        pt = prof.at(1.0)
        assert abs(pt.f - seg.f[-1]) <= 1e-7
        assert abs(pt.fr - seg.fr[-1]) <= 1e-7

    def test_exploratory_records_events(self):
        """lambda <= 1/(n-1): the march reports what it saw, no exceptions."""
        params = Parameters(2, 0.5, -1.0)
        prof, events, info = solve_profile(params, SolverConfig(r_max=10.0), mode="exploratory")
        assert prof.r_max <= 10.0
        assert all(e.kind in (
            "w_nonpositive", "fr_nonpositive", "frr_nonpositive", "step_underflow",
        ) for e in events)
        # the breakdown radius is reported, not asserted
        if events:
            assert events[0].r > 0.0

    def test_self_convergence(self, solved_cache):
        """Halving tolerances changes f(r_max) by less than the coarser run's
        reported error estimate."""
        prof_c, _, info_c = solved_cache(2, 2.0, -1.0, r_max=1e4)
        prof_f, _, info_f = solved_cache(2, 2.0, -1.0, r_max=1e4, tol=5e-13)
        diff = abs(prof_c.f[-1] - prof_f.f[-1])
        assert diff < info_c["integrator"]["err_estimate"]

    def test_w_equation_consistency(self, solved_cache):
        """Centered-difference w_r matches r f_rr (the identity's collapsed
        right-hand side) to discretization accuracy at interior nodes."""
        prof, _, _ = solved_cache(2, 2.0, -1.0, r_max=1e4)
        res = w_identity_residuals(prof)
        assert res.max() < 1e-4

    def test_node_self_consistency(self, solved_cache):
        """Stored f_rr at every node equals the naive right-hand side within
        the node's budget (solver tolerance plus the evaluation's rounding
        floor, which dominates at large radius)."""
        from imcfprofile import ode_rhs

        prof, _, _ = solved_cache(2, 1.5, -1.0, r_max=1e4)
        for i in range(1, len(prof), 7):
            rhs = ode_rhs(prof.params, float(prof.r[i]), float(prof.f[i]), float(prof.fr[i]))
            assert abs(prof.frr[i] - rhs) <= prof.consistency_tolerance(i)

    @pytest.mark.parametrize("policy", ["uniform", "adaptive-native"])
    def test_output_grid_policies(self, policy):
        params = Parameters(2, 2.0, -1.0)
        prof, events, _ = solve_profile(params, SolverConfig(r_max=50.0, output_grid=policy))
        assert events == []
        assert prof.r_max == pytest.approx(50.0)
        assert len(prof) > 100

    def test_extreme_growth_exponent(self):
        """alpha0 = 21 (lam just above the threshold): f(1e4) ~ 4e72 and the
        slope-ratio limit still lands to rounding."""
        from imcfprofile.asymptotics import estimate_limit

        params = Parameters(2, 1.05, -1.0)
        prof, events, _ = solve_profile(params, SolverConfig(r_max=1e4))
        assert events == []
        rep = estimate_limit(prof)
        assert abs(rep.q_limit_estimate - 21.0) < 1e-9

    def test_unrepresentable_height_reported(self):
        """alpha0 = 101: f_r leaves the double range before r_max; a clear
        error tells the caller to reduce r_max."""
        from imcfprofile import StepUnderflow

        with pytest.raises(StepUnderflow, match="floating-point range"):
            solve_profile(Parameters(2, 1.01, -1.0), SolverConfig(r_max=1e4))

    def test_w_equation_residual_refines(self):
        """O(step^2): refining the output grid shrinks the defect ~4x."""
        params = Parameters(2, 2.0, -1.0)

        def run(density):
            config = SolverConfig(r_max=10.0, output_grid="log", grid_density=density)
            prof, _, _ = solve_profile(params, config)
            res = w_identity_residuals(prof)
            return res.max()

        coarse, fine = run(64), run(128)
        assert fine < coarse / 2.5


class TestExtendPicard:
    def test_left_endpoint_fixed(self, origin_cache):
        """Phi_1(r1) = a0 and Phi_2(r1) = b0 for any admissible seed."""
        params = Parameters(2, 2.0, -1.0)
        origin, _ = origin_cache(2, 2.0, -1.0)
        start = origin.at(origin.r_max)
        window = default_window(origin.r_max, start.f, start.fr)
        seg = extend_picard(params, window)
        assert seg.r[0] == window.r1
        assert seg.f[0] == pytest.approx(start.f, abs=1e-15)
        assert seg.fr[0] == pytest.approx(start.fr, abs=1e-14)

    def test_contraction_ratio_bound(self, origin_cache):
        params = Parameters(2, 2.0, -1.0)
        origin, _ = origin_cache(2, 2.0, -1.0)
        start = origin.at(origin.r_max)
        _, diags = extend_picard_chain(
            params, origin.r_max, start.f, start.fr, 1.0, SolverConfig()
        )
        assert all(d.observed_ratio <= 1.0 / 3.0 + 0.05 for d in diags)

    def test_window_hypothesis_enforced(self):
        with pytest.raises(DomainError):
            ExtensionWindow(r1=1.0, a0=1.0, b0=0.5, a1=0.1, delta=0.1)

    def test_denominator_bound_inside_window(self, origin_cache):
        params = Parameters(2, 2.0, -1.0)
        origin, _ = origin_cache(2, 2.0, -1.0)
        start = origin.at(origin.r_max)
        window = default_window(origin.r_max, start.f, start.fr)
        seg = extend_picard(params, window)
        den = seg.r * seg.fr - seg.f
        assert np.min(den) >= window.a1 / 2.0


class TestDetectBreakdown:
    def test_certified_profile_clean(self, solved_cache):
        prof, _, _ = solved_cache(2, 2.0, -1.0, r_max=1e4)
        assert detect_breakdown(prof.params, prof) == []

    def test_synthetic_violation_found(self, quadratic_profile):
        fr = quadratic_profile.fr.copy()
        fr[40] = -0.01
        bad = RadialProfile(
            params=quadratic_profile.params,
            r=quadratic_profile.r,
            f=quadratic_profile.f,
            fr=fr,
            frr=quadratic_profile.frr,
            provenance=quadratic_profile.provenance,
        )
        events = [e for e in detect_breakdown(bad.params, bad) if e.kind == "fr_nonpositive"]
        assert len(events) == 1
        assert events[0].r == pytest.approx(float(bad.r[40]))
        assert events[0].values["fr"] == pytest.approx(-0.01)
