"""Run configuration: strict TOML parsing and validation.

Config layout (all keys named here; unknown keys are rejected so typos
cannot silently fall back to defaults):

    [spaceform]  K = -1 | 1, R > 0, n >= 2, theta in (0, pi)
    [grid]       N  (even integer >= 16)
    [flow]       cfl, t_max, tol_stop, snapshot_every, strict_angle
    [initial]    cap_rhat, perturb_amp, perturb_mode
    [output]     dir
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, DomainError
from .flow import FlowConfig
from .grid import Grid
from .spaceform import SpaceForm, angle_bound

_SCHEMA = {
    "spaceform": {"K", "R", "n", "theta"},
    "grid": {"N"},
    "flow": {"cfl", "t_max", "tol_stop", "snapshot_every", "strict_angle"},
    "initial": {"cap_rhat", "perturb_amp", "perturb_mode"},
    "output": {"dir"},
}

_DEFAULTS = {
    "cfl": 0.4,
    "t_max": 10.0,
    "tol_stop": 1e-7,
    "snapshot_every": 500,
    "strict_angle": False,
    "perturb_amp": 0.0,
    "perturb_mode": 2,
    "dir": "out",
}


@dataclass(frozen=True)
class RunConfig:
    K: int
    R: float
    n: int
    theta: float
    N: int
    cfl: float
    t_max: float
    tol_stop: float
    snapshot_every: int
    strict_angle: bool
    cap_rhat: float
    perturb_amp: float
    perturb_mode: int
    output_dir: str

    def spaceform(self) -> SpaceForm:
        return SpaceForm(K=self.K, R=self.R, n=self.n, theta=self.theta)

    def grid(self) -> Grid:
        return Grid(self.N, self.n)

    def flow_config(self) -> FlowConfig:
        return FlowConfig(
            sf=self.spaceform(), grid=self.grid(), cap_rhat=self.cap_rhat,
            perturb_amp=self.perturb_amp, perturb_mode=self.perturb_mode,
            cfl=self.cfl, t_max=self.t_max, tol_stop=self.tol_stop,
            snapshot_every=self.snapshot_every, strict_angle=self.strict_angle)

    def as_dict(self) -> dict:
        return {
            "spaceform": {"K": self.K, "R": self.R, "n": self.n, "theta": self.theta},
            "grid": {"N": self.N},
            "flow": {"cfl": self.cfl, "t_max": self.t_max, "tol_stop": self.tol_stop,
                     "snapshot_every": self.snapshot_every, "strict_angle": self.strict_angle},
            "initial": {"cap_rhat": self.cap_rhat, "perturb_amp": self.perturb_amp,
                        "perturb_mode": self.perturb_mode},
            "output": {"dir": self.output_dir},
        }


def _require(table: dict, section: str, key: str):
    if key not in table:
        raise ConfigError(f"[{section}] {key}: required key is missing")
    return table[key]


def _number(value, section, key, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key}: expected a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"[{section}] {key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def parse_config(path: str, warn=None) -> RunConfig:
    """Parse and validate a run configuration file.

    Malformed TOML and out-of-range values raise ConfigError with the
    offending key (or line, for syntax errors) named.  The contact-angle
    restriction is enforced when strict_angle is set and reported through
    `warn` (default: stderr) otherwise.
    """
    if warn is None:
        def warn(msg):
            print(f"warning: {msg}", file=sys.stderr)

    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc

    for section, table in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key in table:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
    for section in ("spaceform", "grid"):
        if section not in raw:
            raise ConfigError(f"required config section [{section}] is missing")

    sf_tab = raw["spaceform"]
    K = _number(_require(sf_tab, "spaceform", "K"), "spaceform", "K", int)
    if K not in (-1, 1):
        raise ConfigError(f"[spaceform] K: must be -1 or +1, got {K}")
    R = _number(_require(sf_tab, "spaceform", "R"), "spaceform", "R")
    n = _number(_require(sf_tab, "spaceform", "n"), "spaceform", "n", int)
    theta = _number(_require(sf_tab, "spaceform", "theta"), "spaceform", "theta")
    if not 0.0 < theta < math.pi:
        raise ConfigError(f"[spaceform] theta: contact angle must lie in the open "
                          f"interval (0, pi), got {theta}")

    N = _number(_require(raw["grid"], "grid", "N"), "grid", "N", int)

    flow_tab = raw.get("flow", {})
    init_tab = raw.get("initial", {})
    out_tab = raw.get("output", {})
    if "initial" in raw:
        _require(init_tab, "initial", "cap_rhat")
    else:
        raise ConfigError("required config section [initial] is missing")

    cfg = RunConfig(
        K=K, R=R, n=n, theta=theta, N=N,
        cfl=_number(flow_tab.get("cfl", _DEFAULTS["cfl"]), "flow", "cfl"),
        t_max=_number(flow_tab.get("t_max", _DEFAULTS["t_max"]), "flow", "t_max"),
        tol_stop=_number(flow_tab.get("tol_stop", _DEFAULTS["tol_stop"]), "flow", "tol_stop"),
        snapshot_every=_number(flow_tab.get("snapshot_every", _DEFAULTS["snapshot_every"]),
                               "flow", "snapshot_every", int),
        strict_angle=bool(flow_tab.get("strict_angle", _DEFAULTS["strict_angle"])),
        cap_rhat=_number(init_tab["cap_rhat"], "initial", "cap_rhat"),
        perturb_amp=_number(init_tab.get("perturb_amp", _DEFAULTS["perturb_amp"]),
                            "initial", "perturb_amp"),
        perturb_mode=_number(init_tab.get("perturb_mode", _DEFAULTS["perturb_mode"]),
                             "initial", "perturb_mode", int),
        output_dir=str(out_tab.get("dir", _DEFAULTS["dir"])),
    )

    # constructing the model objects runs the remaining range checks
    try:
        sf = cfg.spaceform()
        cfg.grid()
        cfg.flow_config()
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    if not sf.angle_ok and not cfg.strict_angle:
        warn(f"angle restriction not met: |cos(theta)|={abs(sf.cos_theta):.6g} "
             f">= (3n+1)/(5n-1)={angle_bound(sf.n):.6g}; convergence is unproven there")
    return cfg
