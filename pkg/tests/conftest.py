"""Shared fixtures: reference space forms and the two standard scenario runs."""

import math

import numpy as np
import pytest

from capflow import FlowConfig, Grid, GraphState, SpaceForm, evolve
from capflow.capfit import cap_state

LN3 = math.log(3.0)


@pytest.fixture(scope="session")
def sf_hyp():
    # r0 = 1/2
    return SpaceForm(K=-1, R=LN3, n=2, theta=math.pi / 3)


@pytest.fixture(scope="session")
def sf_sph():
    # r0 = tan(pi/6)
    return SpaceForm(K=1, R=math.pi / 3, n=2, theta=math.pi / 3)


def standard_config(sf, N=128):
    return FlowConfig(sf=sf, grid=Grid(N, sf.n), cap_rhat=0.4, perturb_amp=0.05,
                      perturb_mode=2, cfl=0.4, t_max=10.0, tol_stop=1e-7,
                      snapshot_every=500)


@pytest.fixture(scope="session")
def standard_traj_hyp(sf_hyp):
    return evolve(standard_config(sf_hyp))


@pytest.fixture(scope="session")
def standard_traj_sph(sf_sph):
    return evolve(standard_config(sf_sph))


def perturbed_profile(sf, grid, amps, base_rhat=0.4):
    """Cap profile plus even-mode cosine perturbations (meets both end slopes)."""
    u = cap_state(base_rhat, sf, grid).u.copy()
    for m, a in enumerate(amps):
        u += a * np.cos(2 * (m + 1) * grid.beta)
    return GraphState(u=u)
