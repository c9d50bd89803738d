"""Limit-cap detection and the energy-minimization comparison report.

The fitted sphere equation rho^2 - 2 c rho cos(beta) + c^2 = rhat^2 is
linear in (c, rhat^2 - c^2), so the least-squares cap through a profile
comes from a 2x2 normal system with no iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import FitFailure
from .grid import GraphState, Grid
from .observables import energy, volume
from .spaceform import SpaceForm, unit_cap_shape


@dataclass(frozen=True)
class CapFit:
    """Least-squares cap through a profile and its quality measures."""

    c: float
    rhat: float
    rms: float
    volume_match: float


def fit_cap(state: GraphState, sf: SpaceForm, grid: Grid,
            reference_volume: float | None = None) -> CapFit:
    """Fit (c, rhat) to the profile and report the rms profile residual.

    volume_match compares the fitted cap's quadrature volume against
    reference_volume (defaults to the state's own volume; pass the run's
    conserved volume to test the volume-matched-limit statement).
    """
    rho = state.rho
    A = np.column_stack([2.0 * rho * grid.cos_beta, np.ones_like(rho)])
    sol, *_ = np.linalg.lstsq(A, rho * rho, rcond=None)
    c, gamma = float(sol[0]), float(sol[1])
    rhat_sq = gamma + c * c
    if rhat_sq <= 0.0:
        raise FitFailure(f"degenerate cap fit: rhat^2 = {rhat_sq:.3e} <= 0")
    rhat = math.sqrt(rhat_sq)
    disc = rhat_sq - (c * grid.sin_beta) ** 2
    if np.any(disc <= 0.0):
        raise FitFailure("degenerate cap fit: fitted sphere does not cover the graph")
    rho_fit = c * grid.cos_beta + np.sqrt(disc)
    rms = float(np.sqrt(np.mean((rho - rho_fit) ** 2)))
    ref = volume(state, sf, grid) if reference_volume is None else reference_volume
    fit_vol = volume(GraphState(u=np.log(rho_fit), t=state.t), sf, grid)
    return CapFit(c=c, rhat=rhat, rms=rms, volume_match=abs(fit_vol - ref) / ref)


def cap_state(rhat: float, sf: SpaceForm, grid: Grid, t: float = 0.0) -> GraphState:
    """Grid state of the exact cap with half-space radius rhat."""
    return GraphState(u=np.log(rhat * unit_cap_shape(grid.beta, sf.theta)), t=t)


def volume_matched_rhat(target_volume: float, sf: SpaceForm, grid: Grid) -> float:
    """Cap radius whose enclosed volume equals the target (monotone bisection)."""
    def gap(rhat):
        return volume(cap_state(rhat, sf, grid), sf, grid) - target_volume

    lo, hi = 1e-3, 1.0
    while gap(hi) < 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise FitFailure("no cap matches the target volume")
    while gap(lo) > 0.0:
        lo *= 0.5
        if lo < 1e-12:
            raise FitFailure("no cap matches the target volume")
    return float(brentq(gap, lo, hi, xtol=1e-14, rtol=1e-14))


@dataclass(frozen=True)
class IsoperimetricReport:
    """Energy comparison of a finished run against the volume-matched cap."""

    e_initial: float
    e_final: float
    cap_rhat: float
    e_cap: float
    cap_rel_diff: float
    energy_decreased: bool
    matches_cap: bool

    @property
    def passed(self) -> bool:
        return self.energy_decreased and self.matches_cap

    def table(self) -> list:
        return [
            ("initial energy", self.e_initial),
            ("final energy", self.e_final),
            ("volume-matched cap energy", self.e_cap),
            ("final vs cap relative difference", self.cap_rel_diff),
        ]


def isoperimetric_check(trajectory, sf: SpaceForm, grid: Grid,
                        cap_tol: float = 1e-3) -> IsoperimetricReport:
    """Check E(final) <= E(initial) and E(final) ~ E(volume-matched cap).

    Failures are reported in the flags, not raised; the initial snapshot's
    volume is the conservation reference.
    """
    records = trajectory.records
    e0, e1 = records[0].energy, records[-1].energy
    rhat = volume_matched_rhat(records[0].volume, sf, grid)
    e_cap = energy(cap_state(rhat, sf, grid), sf, grid)
    rel = abs(e1 - e_cap) / abs(e_cap)
    return IsoperimetricReport(
        e_initial=e0,
        e_final=e1,
        cap_rhat=rhat,
        e_cap=e_cap,
        cap_rel_diff=rel,
        energy_decreased=e1 <= e0 + 1e-8 * abs(e0),
        matches_cap=rel <= cap_tol,
    )
