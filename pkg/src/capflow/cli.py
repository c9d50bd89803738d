"""Command-line entry points: `capflow evolve <config>` and `capflow verify <config>`.

Exit codes: 0 = converged (or verify passed), 2 = time limit reached,
1 = configuration error, runtime failure, or a failed invariant check.
The CAPFLOW_OUTPUT_DIR environment variable overrides [output] dir.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import runio
from .capfit import cap_state, fit_cap
from .config import RunConfig, parse_config
from .errors import CapflowError, ConfigError, FitFailure
from .flow import evolve, speed_terms
from .grid import GraphState, Grid
from .observables import (mean_curvature_reduction, minkowski_residual, node_data,
                          principal_curvatures)
from .spaceform import SpaceForm

VOLUME_TOL_BASE = 1e-4      # relative drift allowed at N = 128
ENERGY_SLACK_REL = 1e-8     # per-snapshot non-increase slack, relative to E(0)
KAPPA_SPREAD_TOL = 1e-3
CAP_RMS_TOL = 1e-5
GRAD_RATIO_TOL = 2.0
CAP_RESIDUAL_TOL_256 = 1e-5
RATE_TOL = 1.8
RATE_FLOOR = 1e-11          # residuals below this are machine zero; rate is n/a


def _check(passed, value, tol, note=None):
    entry = {"passed": bool(passed), "value": value, "tol": tol}
    if note:
        entry["note"] = note
    return entry


def run_checks(cfg: RunConfig, traj, fit) -> dict:
    """Pass/fail entries for every invariant in the standard check set."""
    records = traj.records
    v0 = records[0].volume
    drift = max(abs(r.volume - v0) / v0 for r in records)
    vol_tol = VOLUME_TOL_BASE * max(1.0, (128.0 / cfg.N) ** 2)

    e0 = abs(records[0].energy)
    slack = ENERGY_SLACK_REL * e0
    worst_rise = max((records[i + 1].energy - records[i].energy
                      for i in range(len(records) - 1)), default=0.0)

    grad_ratio = traj.grad_max / max(traj.grad_early_max, 1e-300)

    checks = {
        "volume_conservation": _check(drift <= vol_tol, drift, vol_tol),
        "energy_monotonicity": _check(worst_rise <= slack, worst_rise, slack),
        "enclosure_barrier": _check(True, traj.barrier_max_violation, None,
                                    note="enforced during the run"),
        "gradient_bound": _check(grad_ratio <= GRAD_RATIO_TOL, grad_ratio, GRAD_RATIO_TOL,
                                 note="diagnostic only; never fails the run"),
    }
    if traj.reason == "converged":
        kspread = records[-1].kappa_spread
        ok = kspread <= KAPPA_SPREAD_TOL and fit is not None and fit.rms <= CAP_RMS_TOL
        checks["convergence_postcondition"] = _check(
            ok, {"kappa_spread": kspread, "cap_rms": None if fit is None else fit.rms},
            {"kappa_spread": KAPPA_SPREAD_TOL, "cap_rms": CAP_RMS_TOL})
    else:
        checks["convergence_postcondition"] = _check(
            True, None, None, note="not applicable: run did not report convergence")
    return checks


def _write_run_artifacts(out_dir, cfg, traj, fit, checks, sf, grid):
    os.makedirs(out_dir, exist_ok=True)
    for snap in traj.snapshots:
        ev = speed_terms(snap.state, sf, grid)
        k_m, k_az = principal_curvatures(snap.state, sf, grid)
        runio.write_snapshot(out_dir, snap.step, grid.beta, snap.state.u,
                             snap.state.rho, ev.G, k_m, k_az)
    runio.write_observables(out_dir, traj.records)
    summary = {
        "config": cfg.as_dict(),
        "termination": traj.reason,
        "steps": traj.steps,
        "wall_time_s": traj.wall_time,
        "initial": traj.records[0].as_dict(),
        "final": traj.records[-1].as_dict(),
        "cap_fit": None if fit is None else {
            "c": fit.c, "rhat": fit.rhat, "rms": fit.rms, "volume_match": fit.volume_match},
        "checks": checks,
        "barrier": {"rhat_lo": traj.barrier_rhats[0], "rhat_hi": traj.barrier_rhats[1],
                    "max_violation": traj.barrier_max_violation},
        "gradient": {"max": traj.grad_max, "early_max": traj.grad_early_max},
    }
    runio.validate_summary(summary)
    runio.write_json(os.path.join(out_dir, "summary.json"), summary)
    return summary


def cmd_evolve(config_path: str) -> int:
    cfg = parse_config(config_path)
    sf, grid = cfg.spaceform(), cfg.grid()
    traj = evolve(cfg.flow_config())
    try:
        fit = fit_cap(traj.final, sf, grid, reference_volume=traj.records[0].volume)
    except FitFailure as exc:
        print(f"warning: cap fit failed: {exc}", file=sys.stderr)
        fit = None
    checks = run_checks(cfg, traj, fit)
    out_dir = os.environ.get("CAPFLOW_OUTPUT_DIR", cfg.output_dir)
    _write_run_artifacts(out_dir, cfg, traj, fit, checks, sf, grid)

    print(f"termination: {traj.reason} after {traj.steps} steps "
          f"(t = {traj.final.t:.6g}, max|G| = {traj.max_abs_G:.3e})")
    failed = []
    for name, entry in checks.items():
        print(f"{'PASS' if entry['passed'] else 'FAIL'}: {name}")
        if not entry["passed"] and name != "gradient_bound":
            failed.append(name)
    if failed:
        print(f"error: invariant check failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0 if traj.reason == "converged" else 2


# ---------------------------------------------------------------------------
# verify: static residuals, identity residual rates, curvature cross-check
# ---------------------------------------------------------------------------

def _cap_residual(sf: SpaceForm, N: int, rhat: float) -> float:
    grid = Grid(N, sf.n)
    return float(np.max(np.abs(speed_terms(cap_state(rhat, sf, grid), sf, grid).G)))


def _verify_profiles(sf: SpaceForm, rng) -> list:
    profiles = [("cap", np.zeros(3))]
    for i in range(3):
        # scale keeps the coarse grid inside the asymptotic decay regime
        profiles.append((f"perturbed-{i}", 0.02 * rng.uniform(-1, 1, 3)))
    return profiles


def _profile_state(sf: SpaceForm, grid: Grid, amps) -> GraphState:
    u = cap_state(0.4, sf, grid).u.copy()
    for m, a in enumerate(amps):
        u += a * np.cos(2 * (m + 1) * grid.beta)
    return GraphState(u=u)


def _rate(coarse: float, fine: float, grid_ratio: float = 2.0):
    """Observed order between two residuals; "n/a" when the ratio is not informative.

    Residuals at machine level have no measurable order, and a signed residual
    crossing zero between the grids sends the ratio anywhere; in both cases
    the passing criterion falls back to plain magnitude decrease (handled by
    callers through the returned tag).
    """
    if abs(coarse) < RATE_FLOOR or abs(fine) < RATE_FLOOR:
        return "n/a"
    if (coarse > 0) != (fine > 0):
        return "n/a (sign change)"
    return math.log2(abs(coarse) / abs(fine)) / math.log2(grid_ratio)


def cmd_verify(config_path: str) -> int:
    cfg = parse_config(config_path)
    sf = cfg.spaceform()
    N_fine = cfg.N
    N_coarse = N_fine // 2
    refinable = N_coarse >= 16 and N_coarse % 2 == 0
    warnings = []
    if not refinable:
        warnings.append(f"refinement disabled: coarse grid N={N_coarse} below the "
                        "minimum; rates reported as n/a")

    cap_tol = CAP_RESIDUAL_TOL_256 * (256.0 / N_fine) ** 2
    all_pass = True

    static = []
    for rhat in (0.25, 0.4, 0.6):
        fine = _cap_residual(sf, N_fine, rhat)
        coarse = _cap_residual(sf, N_coarse, rhat) if refinable else None
        rate = _rate(coarse, fine) if refinable else "n/a"
        if isinstance(rate, str):
            ok = fine <= cap_tol and (coarse is None or fine <= coarse)
        else:
            ok = fine <= cap_tol and rate >= RATE_TOL
        all_pass &= ok
        static.append({"rhat": rhat, "residual_fine": fine, "residual_coarse": coarse,
                       "rate": rate, "passed": ok})

    rng = np.random.default_rng(42)
    identities = []
    for name, amps in _verify_profiles(sf, rng):
        for k in range(1, sf.n + 1):
            fine_grid = Grid(N_fine, sf.n)
            fine = minkowski_residual(_profile_state(sf, fine_grid, amps), sf, fine_grid, k)
            coarse = None
            rate = "n/a"
            if refinable:
                coarse_grid = Grid(N_coarse, sf.n)
                coarse = minkowski_residual(_profile_state(sf, coarse_grid, amps),
                                            sf, coarse_grid, k)
                rate = _rate(coarse, fine)
            if isinstance(rate, str):
                ok = coarse is None or abs(fine) <= abs(coarse)
            else:
                ok = rate >= RATE_TOL
            all_pass &= ok
            identities.append({"profile": name, "k": k, "residual_fine": fine,
                               "residual_coarse": coarse, "rate": rate, "passed": ok})

    grid = Grid(N_fine, sf.n)
    worst = 0.0
    for _ in range(5):
        state = _profile_state(sf, grid, 0.04 * rng.standard_normal(3))
        data = node_data(state, sf, grid)
        k_m, k_az = principal_curvatures(state, sf, grid, data)
        H_sum = k_m + (sf.n - 1) * k_az
        H_red = mean_curvature_reduction(data, sf, grid)
        worst = max(worst, float(np.max(np.abs(H_sum - H_red) / np.abs(H_red))))
    cross_ok = worst <= 1e-6
    all_pass &= cross_ok

    out_dir = os.environ.get("CAPFLOW_OUTPUT_DIR", cfg.output_dir)
    os.makedirs(out_dir, exist_ok=True)
    report = {
        "config": cfg.as_dict(),
        "grids": {"fine": N_fine, "coarse": N_coarse if refinable else None},
        "cap_residual_tol": cap_tol,
        "rate_tol": RATE_TOL,
        "static_caps": static,
        "minkowski": identities,
        "curvature_crosscheck": {"max_rel_diff": worst, "tol": 1e-6, "passed": cross_ok},
        "warnings": warnings,
        "all_pass": bool(all_pass),
    }
    runio.write_json(os.path.join(out_dir, "verify.json"), report)

    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    static_ok = all(s["passed"] for s in static)
    ident_ok = all(m["passed"] for m in identities)
    print(f"{'PASS' if static_ok else 'FAIL'}: static cap residuals "
          f"(worst {max(s['residual_fine'] for s in static):.3e} <= {cap_tol:.3e})")
    print(f"{'PASS' if ident_ok else 'FAIL'}: identity residual rates")
    print(f"{'PASS' if cross_ok else 'FAIL'}: curvature cross-check "
          f"(max rel diff {worst:.3e})")
    return 0 if all_pass else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="capflow",
        description="Axisymmetric capillary-boundary curvature flow in curved balls")
    sub = parser.add_subparsers(dest="command", required=True)
    p_evolve = sub.add_parser("evolve", help="run a flow and write its artifacts")
    p_evolve.add_argument("config", help="TOML run configuration")
    p_verify = sub.add_parser("verify", help="run the static/identity verification suites")
    p_verify.add_argument("config", help="TOML run configuration")
    args = parser.parse_args(argv)

    try:
        if args.command == "evolve":
            return cmd_evolve(args.config)
        return cmd_verify(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
