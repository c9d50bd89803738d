"""Flow speed, step control, and the evolution loop."""

import math

import numpy as np
import pytest

from capflow import (FlowConfig, GraphState, Grid, NumericalFailure, SpaceForm,
                     evolve, initial_state, speed_G, speed_from_support, stable_dt, step)
from capflow.capfit import cap_state
from capflow.errors import InvariantViolation
from capflow.flow import STENCIL_STIFFNESS, cap_bracket, check_enclosure, speed_terms

from conftest import perturbed_profile

LN3 = math.log(3.0)


class TestSpeed:
    def test_static_cap_residual_small(self, sf_hyp, sf_sph):
        for sf in (sf_hyp, sf_sph):
            g = Grid(128, 2)
            st = cap_state(0.4, sf, g)
            assert np.max(np.abs(speed_G(st, sf, g))) < 2e-6

    def test_free_boundary_constant_is_exactly_static(self):
        for K, R in ((-1, LN3), (1, math.pi / 3)):
            sf = SpaceForm(K=K, R=R, n=2, theta=math.pi / 2)
            g = Grid(64, 2)
            for rho0 in (0.3, 1.0, 1.7):
                st = GraphState(u=np.full(g.N + 1, math.log(rho0)))
                assert np.max(np.abs(speed_G(st, sf, g))) < 1e-12

    def test_divergence_and_support_assemblies_agree(self, sf_hyp, sf_sph):
        rng = np.random.default_rng(10)
        for sf in (sf_hyp, sf_sph):
            g = Grid(64, 2)
            for _ in range(20):
                st = perturbed_profile(sf, g, 0.05 * rng.standard_normal(3))
                diff = speed_G(st, sf, g) - speed_from_support(st, sf, g)
                assert np.max(np.abs(diff)) < 1e-10

    @pytest.mark.filterwarnings("ignore:overflow")
    def test_nonfinite_state_names_node(self, sf_hyp):
        g = Grid(64, 2)
        u = np.zeros(g.N + 1)
        u[17] = 800.0  # rho overflows e^U arithmetic into inf/nan
        with pytest.raises(NumericalFailure) as err:
            speed_G(GraphState(u=u), sf_hyp, g)
        assert err.value.node is not None


class TestStableDt:
    def test_doubling_N_quarters_dt(self, sf_hyp):
        dts = {}
        for N in (64, 128):
            g = Grid(N, 2)
            dts[N] = stable_dt(cap_state(0.4, sf_hyp, g), sf_hyp, g, 0.4)
        assert dts[64] / dts[128] == pytest.approx(4.0, rel=1e-6)

    def test_closed_form_at_flat_profile(self):
        """u == 0, K = -1, r0 = 1/2: the pole dominates with D = n*cK*w = 16/3."""
        sf = SpaceForm(K=-1, R=LN3, n=2, theta=math.pi / 2)
        g = Grid(64, 2)
        st = GraphState(u=np.zeros(g.N + 1))
        expected = 0.4 * g.h * g.h / (STENCIL_STIFFNESS * 16.0 / 3.0)
        assert stable_dt(st, sf, g, 0.4) == pytest.approx(expected, rel=1e-12)

    def test_larger_slope_gives_larger_dt(self, sf_hyp):
        """v^3 in the denominator of D: steeper graphs relax the limit."""
        g = Grid(64, 2)
        flat = GraphState(u=np.zeros(g.N + 1))
        steep = GraphState(u=0.5 * np.cos(2 * g.beta))
        sf_free = SpaceForm(K=-1, R=LN3, n=2, theta=math.pi / 2)
        ev_flat = speed_terms(flat, sf_free, g)
        ev_steep = speed_terms(steep, sf_free, g)
        # compare the u_bb coefficient at the node of maximal slope
        j = int(np.argmax(np.abs(ev_steep.u_b)))
        assert ev_steep.v[j] > 1.05
        w_flat = ev_flat.D[j] * ev_flat.v[j] ** 3
        w_steep = ev_steep.D[j] * ev_steep.v[j] ** 3
        assert ev_steep.D[j] / ev_flat.D[j] < (w_steep / w_flat) * 0.9


class TestStep:
    def test_zero_dt_is_identity(self, sf_hyp):
        g = Grid(64, 2)
        st = cap_state(0.4, sf_hyp, g)
        new = step(st, sf_hyp, g, 0.0)
        np.testing.assert_array_equal(new.u, st.u)
        assert new.t == st.t

    def test_midpoint_local_order(self, sf_hyp):
        """Two half steps against one full step differ at O(dt^3)."""
        g = Grid(64, 2)
        st = perturbed_profile(sf_hyp, g, [0.05, 0.0, 0.0])
        diffs = {}
        for dt in (1e-4, 5e-5):
            full = step(st, sf_hyp, g, dt)
            halves = step(step(st, sf_hyp, g, dt / 2), sf_hyp, g, dt / 2)
            diffs[dt] = np.max(np.abs(full.u - halves.u))
        order = math.log2(diffs[1e-4] / diffs[5e-5])
        assert order >= 2.5

    def test_step_off_cap_is_bounded_by_residual(self, sf_hyp):
        g = Grid(128, 2)
        st = cap_state(0.4, sf_hyp, g)
        res = np.max(np.abs(speed_G(st, sf_hyp, g)))
        dt = stable_dt(st, sf_hyp, g, 0.4)
        new = step(st, sf_hyp, g, dt)
        assert np.max(np.abs(new.u - st.u)) <= 1.5 * dt * res


class TestEvolve:
    def test_exact_cap_converges_immediately(self, sf_hyp):
        g = Grid(128, 2)
        cfg = FlowConfig(sf=sf_hyp, grid=g, cap_rhat=0.4, perturb_amp=0.0,
                         t_max=1.0, tol_stop=2e-6, snapshot_every=50)
        traj = evolve(cfg)
        assert traj.reason == "converged"
        assert traj.steps <= 5
        u_cap = cap_state(0.4, sf_hyp, g).u
        assert np.max(np.abs(traj.final.u - u_cap)) <= 1e-8

    def test_perturbed_cap_converges(self, sf_hyp):
        g = Grid(64, 2)
        cfg = FlowConfig(sf=sf_hyp, grid=g, cap_rhat=0.4, perturb_amp=0.05,
                         perturb_mode=2, t_max=3.0, tol_stop=5e-7, snapshot_every=1000)
        traj = evolve(cfg)
        assert traj.reason == "converged"
        from capflow import fit_cap
        fit = fit_cap(traj.final, sf_hyp, g)
        assert fit.rms < 1e-4

    def test_time_limit_termination(self, sf_hyp):
        g = Grid(64, 2)
        cfg = FlowConfig(sf=sf_hyp, grid=g, cap_rhat=0.4, perturb_amp=0.01,
                         perturb_mode=2, t_max=0.1, tol_stop=0.0, snapshot_every=10**6)
        traj = evolve(cfg)
        assert traj.reason == "time-limit"
        assert traj.final.t == pytest.approx(0.1, abs=1e-12)

    def test_snapshot_cadence_and_records(self, sf_hyp):
        g = Grid(64, 2)
        cfg = FlowConfig(sf=sf_hyp, grid=g, cap_rhat=0.4, perturb_amp=0.02,
                         perturb_mode=2, t_max=0.02, tol_stop=0.0, snapshot_every=100)
        traj = evolve(cfg)
        steps = [s.step for s in traj.snapshots]
        assert steps[0] == 0
        assert steps[-1] == traj.steps
        assert all(b > a for a, b in zip(steps, steps[1:]))
        assert all(math.isfinite(r.energy) for r in traj.records)


class TestEnclosure:
    def test_bracket_encloses_initial_profile(self, sf_hyp):
        g = Grid(64, 2)
        cfg = FlowConfig(sf=sf_hyp, grid=g, cap_rhat=0.4, perturb_amp=0.05,
                         perturb_mode=2)
        st = initial_state(cfg)
        lo, hi = cap_bracket(st, sf_hyp, g)
        assert 0 < lo < hi
        check_enclosure(st, sf_hyp, g, lo, hi, tol=1e-12)  # tight caps touch

    def test_violation_raises_with_name(self, sf_hyp):
        g = Grid(64, 2)
        st = cap_state(0.5, sf_hyp, g)
        with pytest.raises(InvariantViolation, match="enclosure barrier"):
            check_enclosure(st, sf_hyp, g, 0.2, 0.3, tol=1e-6)


class TestConfigValidation:
    def test_ranges(self, sf_hyp):
        g = Grid(64, 2)
        with pytest.raises(Exception):
            FlowConfig(sf=sf_hyp, grid=g, cap_rhat=0.4, cfl=0.6)
        with pytest.raises(Exception):
            FlowConfig(sf=sf_hyp, grid=g, cap_rhat=0.4, t_max=0.0)
        with pytest.raises(Exception):
            FlowConfig(sf=sf_hyp, grid=g, cap_rhat=0.4, perturb_amp=0.1, perturb_mode=3)

    def test_strict_angle(self):
        sf = SpaceForm(K=-1, R=LN3, n=2, theta=math.acos(0.9))
        g = Grid(64, 2)
        with pytest.raises(Exception, match="angle restriction"):
            FlowConfig(sf=sf, grid=g, cap_rhat=0.4, strict_angle=True)
        FlowConfig(sf=sf, grid=g, cap_rhat=0.4, strict_angle=False)  # warning-only
