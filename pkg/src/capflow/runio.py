"""Run artifacts: snapshot/time-series CSV and summary/verify JSON.

Floats are serialized with 17 significant digits, which round-trips IEEE
doubles bit-exactly through text.
"""

from __future__ import annotations

import json
import os

import numpy as np

SNAPSHOT_COLUMNS = ("beta", "u", "rho", "G", "kappa_beta", "kappa_azimuthal")
OBSERVABLE_COLUMNS = ("t", "area", "wetting", "volume", "energy", "max_abs_G", "kappa_spread")

SUMMARY_KEYS = frozenset({
    "config", "termination", "steps", "wall_time_s",
    "initial", "final", "cap_fit", "checks", "barrier", "gradient",
})

CHECK_NAMES = (
    "volume_conservation",
    "energy_monotonicity",
    "enclosure_barrier",
    "gradient_bound",
    "convergence_postcondition",
)


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path, columns, arrays) -> None:
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(columns) + "\n")
        for row in zip(*arrays):
            f.write(",".join(fmt(x) for x in row) + "\n")


def read_csv(path) -> dict:
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        rows = [line.strip().split(",") for line in f if line.strip()]
    cols = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(header)}
    return cols


def snapshot_path(out_dir: str, step: int) -> str:
    return os.path.join(out_dir, f"snap_{step}.csv")


def write_snapshot(out_dir, step, beta, u, rho, G, kappa_beta, kappa_azimuthal) -> str:
    path = snapshot_path(out_dir, step)
    write_csv(path, SNAPSHOT_COLUMNS, (beta, u, rho, G, kappa_beta, kappa_azimuthal))
    return path


def write_observables(out_dir, records) -> str:
    path = os.path.join(out_dir, "observables.csv")
    cols = [[getattr(r, name if name != "max_abs_G" else "max_abs_G") for r in records]
            for name in OBSERVABLE_COLUMNS]
    write_csv(path, OBSERVABLE_COLUMNS, cols)
    return path


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def validate_summary(summary: dict) -> None:
    """Reject summaries whose top-level keys drift from the documented set."""
    keys = set(summary)
    if keys != SUMMARY_KEYS:
        missing = SUMMARY_KEYS - keys
        extra = keys - SUMMARY_KEYS
        raise ValueError(f"summary key set mismatch: missing={sorted(missing)} "
                         f"extra={sorted(extra)}")
    checks = set(summary["checks"])
    if checks != set(CHECK_NAMES):
        raise ValueError(f"summary checks mismatch: {sorted(checks)}")
