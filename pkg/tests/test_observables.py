"""Quadratures, curvatures, symmetric functions and integral-identity residuals.

Expected values come from independent oracles: closed-form geodesic disk/ball
measures, scipy adaptive quadrature, finite-difference normal variation, and
brute-force elementary symmetric polynomials.
"""

import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad

from capflow import GraphState, Grid, SpaceForm, area, energy, volume, wetting_area
from capflow.capfit import cap_state
from capflow.observables import (cap_mean_curvature, mean_curvature,
                                 mean_curvature_reduction, minkowski_residual,
                                 node_data, principal_curvatures, sigma_k, sigma_pair,
                                 simpson, sphere_area)
from capflow.spaceform import cap_profile, cap_profile_from_rhat

from conftest import perturbed_profile

LN3 = math.log(3.0)


def cap_node_data(rhat, sf, grid):
    """Node data with analytic cap derivatives (quadrature-error-only paths)."""
    cap = cap_profile_from_rhat(rhat, sf)
    state = GraphState(u=np.log(cap.rho(grid.beta)))
    return state, node_data(state, sf, grid,
                            u_b=cap.u_beta(grid.beta), u_bb=cap.u_betabeta(grid.beta))


class TestEuclideanSpecialization:
    """With unit conformal weight the quadratures reduce to flat-space measures."""

    def test_unit_hemisphere_area(self):
        g = Grid(128, 2)
        st = GraphState(u=np.zeros(g.N + 1))
        data = node_data(st, SpaceForm(K=-1, R=LN3, n=2, theta=math.pi / 2), g)
        flat = sphere_area(2) * simpson(data.rho**2 * data.v * g.sin_beta, g.h)
        assert flat == pytest.approx(2 * math.pi, rel=1e-8)

    def test_unit_disk_wetting(self):
        M = 256
        s = np.linspace(0.0, 1.0, M + 1)
        assert sphere_area(2) * simpson(s, 1.0 / M) == pytest.approx(math.pi, rel=1e-12)

    def test_unit_half_ball_volume(self):
        g = Grid(128, 2)
        rho = np.ones(g.N + 1)
        inner = rho**3 / 3.0
        flat = sphere_area(2) * simpson(inner * g.sin_beta, g.h)
        assert flat == pytest.approx(2 * math.pi / 3, rel=1e-8)


class TestCurvedClosedForms:
    def test_totally_geodesic_disk_area_hyperbolic(self):
        """u == 0 maps to the totally geodesic disk: area 2 pi (cosh R - 1)."""
        sf = SpaceForm(K=-1, R=LN3, n=2, theta=math.pi / 2)
        g = Grid(256, 2)
        st = GraphState(u=np.zeros(g.N + 1))
        expect = 2 * math.pi * (math.cosh(LN3) - 1.0)
        assert area(st, sf, g) == pytest.approx(expect, rel=1e-6)

    def test_half_ball_volume_hyperbolic(self):
        sf = SpaceForm(K=-1, R=LN3, n=2, theta=math.pi / 2)
        g = Grid(256, 2)
        st = GraphState(u=np.zeros(g.N + 1))
        expect = math.pi * (math.sinh(LN3) * math.cosh(LN3) - LN3)
        assert volume(st, sf, g) == pytest.approx(expect, rel=1e-6)

    def test_totally_geodesic_disk_area_spherical(self):
        sf = SpaceForm(K=1, R=math.pi / 3, n=2, theta=math.pi / 2)
        g = Grid(256, 2)
        st = GraphState(u=np.zeros(g.N + 1))
        expect = 2 * math.pi * (1.0 - math.cos(math.pi / 3))
        assert area(st, sf, g) == pytest.approx(expect, rel=1e-6)

    def test_half_ball_volume_spherical(self):
        sf = SpaceForm(K=1, R=math.pi / 3, n=2, theta=math.pi / 2)
        g = Grid(256, 2)
        st = GraphState(u=np.zeros(g.N + 1))
        R = math.pi / 3
        expect = math.pi * (R - math.sin(R) * math.cos(R))
        assert volume(st, sf, g) == pytest.approx(expect, rel=1e-6)


class TestWetting:
    def test_vanishes_with_contact_radius(self, sf_hyp):
        g = Grid(64, 2)
        st = GraphState(u=np.full(g.N + 1, math.log(1e-8)))
        assert wetting_area(st, sf_hyp, g) < 1e-12

    def test_against_adaptive_quadrature(self):
        """Fixed Simpson against scipy.quad on the conformally weighted disk."""
        sf = SpaceForm(K=-1, R=LN3, n=2, theta=math.pi / 2)
        g = Grid(128, 2)
        st = GraphState(u=np.zeros(g.N + 1))  # contact radius 1
        kp = 1.0 + sf.K * sf.r0**2

        def integrand(s):
            return (4.0 * sf.r0 / (kp * (1.0 + s * s))) ** 2 * s

        oracle, err = quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
        oracle *= sphere_area(2)
        got = wetting_area(st, sf, g)
        assert abs(got - oracle) < 1e-8
        # same disk in closed form: 2 pi (8/3)^2 (1/2 - 1/4) / ... = 32 pi / 9
        assert got == pytest.approx(32.0 * math.pi / 9.0, rel=1e-9)


class TestVolume:
    def test_monotone_in_cap_radius(self, sf_hyp):
        g = Grid(64, 2)
        vols = [volume(cap_state(r, sf_hyp, g), sf_hyp, g) for r in (0.2, 0.3, 0.45)]
        assert vols[0] < vols[1] < vols[2]


class TestQuadratureOrder:
    def test_area_refinement_rate(self, sf_hyp):
        """With analytic profile derivatives the area error is pure Simpson."""
        areas = {}
        for N in (64, 128, 256):
            g = Grid(N, 2)
            st, data = cap_node_data(0.4, sf_hyp, g)
            areas[N] = area(st, sf_hyp, g, data)
        d1 = abs(areas[64] - areas[128])
        d2 = abs(areas[128] - areas[256])
        assert math.log2(d1 / d2) >= 3.8


class TestPrincipalCurvatures:
    def test_reduction_identity_pointwise(self, sf_hyp, sf_sph):
        """Sum of conformal principal curvatures equals the scalar reduction."""
        rng = np.random.default_rng(20)
        for sf in (sf_hyp, sf_sph):
            g = Grid(256, 2)
            for _ in range(5):
                st = perturbed_profile(sf, g, 0.04 * rng.standard_normal(3))
                data = node_data(st, sf, g)
                k_m, k_az = principal_curvatures(st, sf, g, data)
                H_red = mean_curvature_reduction(data, sf, g)
                rel = np.max(np.abs(k_m + (g.n - 1) * k_az - H_red) / np.abs(H_red))
                assert rel < 1e-6  # identical algebra; observed ~1e-15

    def test_caps_are_umbilic(self, sf_hyp, sf_sph):
        for sf in (sf_hyp, sf_sph):
            g = Grid(256, 2)
            st, data = cap_node_data(0.4, sf, g)
            k_m, k_az = principal_curvatures(st, sf, g, data)
            assert np.max(np.abs(k_m - k_az)) < 1e-11  # analytic derivatives
            k_m_d, k_az_d = principal_curvatures(st, sf, g)
            assert np.max(np.abs(k_m_d - k_az_d)) < 1e-5  # discrete: O(h^2)-level

    def test_cap_mean_curvature_closed_form(self):
        """H on caps matches n(1 + K(r0^2 + 2 r r0 cos(theta)))/(2r), both K."""
        for K, R in ((-1, LN3), (1, math.pi / 3)):
            for theta in (math.pi / 3, 2 * math.pi / 3):
                sf = SpaceForm(K=K, R=R, n=2, theta=theta)
                g = Grid(256, 2)
                for r in (0.3, 0.5, 0.8):
                    cap = cap_profile(r, sf)
                    st = GraphState(u=np.log(cap.rho(g.beta)))
                    data = node_data(st, sf, g, u_b=cap.u_beta(g.beta),
                                     u_bb=cap.u_betabeta(g.beta))
                    H = mean_curvature(st, sf, g, data)
                    expect = cap_mean_curvature(r, sf)
                    np.testing.assert_allclose(H, expect, rtol=1e-10)

    def test_euclidean_formulas_against_fd_normal_variation(self):
        """Shape-operator entries from 3D finite differences of the embedding."""
        c, rh = -0.15, 0.45

        def rho_f(b):
            return c * np.cos(b) + np.sqrt(rh**2 - c**2 * np.sin(b) ** 2) \
                + 0.03 * np.cos(2 * b)

        def emb(b, phi):
            r = rho_f(b)
            return np.array([r * math.sin(b) * math.cos(phi),
                             r * math.sin(b) * math.sin(phi),
                             r * math.cos(b)])

        d = 1e-5
        for b0 in (0.4, 0.9, 1.3):
            Xb = (emb(b0 + d, 0) - emb(b0 - d, 0)) / (2 * d)
            Xp = (emb(b0, d) - emb(b0, -d)) / (2 * d)
            Xbb = (emb(b0 + d, 0) - 2 * emb(b0, 0) + emb(b0 - d, 0)) / d**2
            Xpp = (emb(b0, d) - 2 * emb(b0, 0) + emb(b0, -d)) / d**2
            Nvec = np.cross(Xb, Xp)
            Nvec /= np.linalg.norm(Nvec)
            if np.dot(Nvec, emb(b0, 0)) < 0:
                Nvec = -Nvec  # outward
            # h(X, Y) = <grad_X nu, Y> = -<nu, X_ab>: spheres get +1/r outward
            kappa_m_fd = -np.dot(Xbb, Nvec) / np.dot(Xb, Xb)
            kappa_az_fd = -np.dot(Xpp, Nvec) / np.dot(Xp, Xp)

            rho0 = float(rho_f(b0))
            ub = float((np.log(rho_f(b0 + d)) - np.log(rho_f(b0 - d))) / (2 * d))
            ubb = float((np.log(rho_f(b0 + d)) - 2 * math.log(rho0)
                         + np.log(rho_f(b0 - d))) / d**2)
            v = math.sqrt(1 + ub * ub)
            kappa_m = (1 + ub * ub - ubb) / (rho0 * v**3)
            kappa_az = (1 - ub / math.tan(b0)) / (rho0 * v)
            assert kappa_m == pytest.approx(kappa_m_fd, rel=1e-5)
            assert kappa_az == pytest.approx(kappa_az_fd, rel=1e-5)


class TestSigmaK:
    def test_umbilic_reduces_to_binomial(self):
        lam = 0.7
        for n in (2, 3, 5):
            for k in range(1, n + 1):
                val = sigma_pair(lam, lam, n, k)
                assert val == pytest.approx(math.comb(n, k) * lam**k, rel=1e-13)

    def test_n2_is_curvature_product(self):
        km, ka = 0.3, 1.1
        assert sigma_pair(km, ka, 2, 2) == pytest.approx(km * ka, rel=1e-14)

    def test_brute_force_elementary_symmetric(self):
        rng = np.random.default_rng(30)
        n = 4
        for _ in range(20):
            km, ka = rng.standard_normal(2)
            kappas = [km] + [ka] * (n - 1)
            for k in range(1, n + 1):
                brute = sum(math.prod(c) for c in itertools.combinations(kappas, k))
                assert sigma_pair(km, ka, n, k) == pytest.approx(brute, rel=1e-12)

    def test_state_interface_and_range(self, sf_hyp):
        g = Grid(64, 2)
        st = cap_state(0.4, sf_hyp, g)
        s1 = sigma_k(st, sf_hyp, g, 1)
        np.testing.assert_allclose(s1, mean_curvature(st, sf_hyp, g), rtol=1e-13)
        with pytest.raises(Exception):
            sigma_k(st, sf_hyp, g, 3)


class TestMinkowskiResiduals:
    def test_caps_satisfy_identities_to_quadrature_error(self, sf_hyp, sf_sph):
        """Analytic cap data: residual is Simpson error only, <= 1e-8 at N = 512."""
        for sf in (sf_hyp, sf_sph):
            g = Grid(512, 2)
            st, data = cap_node_data(0.4, sf, g)
            for k in (1, 2):
                assert abs(minkowski_residual(st, sf, g, k, data)) < 1e-8

    def test_k2_decays_under_refinement(self, sf_hyp, sf_sph):
        rng = np.random.default_rng(31)
        amps = 0.02 * rng.uniform(-1, 1, 3)
        for sf in (sf_hyp, sf_sph):
            res = {}
            for N in (64, 256):
                g = Grid(N, 2)
                res[N] = abs(minkowski_residual(perturbed_profile(sf, g, amps), sf, g, 2))
            assert res[256] < res[64] / 4


class TestEnergy:
    def test_free_boundary_energy_is_area(self):
        sf = SpaceForm(K=-1, R=LN3, n=2, theta=math.pi / 2)
        g = Grid(64, 2)
        st = cap_state(0.4, sf, g)
        assert energy(st, sf, g) == pytest.approx(area(st, sf, g), rel=1e-14)

    def test_acute_angle_reduces_energy(self, sf_hyp):
        g = Grid(64, 2)
        st = cap_state(0.4, sf_hyp, g)
        assert energy(st, sf_hyp, g) < area(st, sf_hyp, g)
        assert wetting_area(st, sf_hyp, g) > 0
