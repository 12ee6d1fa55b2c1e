"""Run configuration: a single TOML file with explicit defaults.

Every knob has a default, `default_config_text` prints all of them, and
validation happens eagerly at load time so a bad file fails before any
compute starts.  Admissibility of the coupling is computed here and
recorded on the config object; experiments that need it consult the
flag and refuse to run otherwise.
"""

from __future__ import annotations

import io
import sys
from dataclasses import dataclass, field
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .action import CouplingParams
from .groups import GroupSpec
from .lattice import LatticeSpec, plaquette_at, rectangle_loop

__all__ = [
    "RunConfig",
    "ConfigError",
    "load_config",
    "parse_config",
    "default_config_dict",
    "default_config_text",
]

EXPERIMENT_KINDS = ("verify", "langevin", "gibbs", "couple", "measure")


class ConfigError(ValueError):
    """Raised for schema violations or out-of-range configuration."""


_DEFAULTS: dict[str, Any] = {
    "model": {
        "group": "SO",
        "n": 3,
        "d": 2,
        "L": 4,
        "beta": 0.005,
    },
    "experiment": {
        "kind": "langevin",
        "seed": 0,
        "output": "",
        "weight_a": 1.2,
        "n_pairs": 64,
        "fit_start": 0.0,
        "checkpoint_every": 0,
    },
    "integrator": {
        "step_size": 0.0,
        "n_steps": 20000,
        "burn_in": 2000,
        "thin": 10,
        "reunitarize_every": 64,
        "measure_every": 100,
    },
    "mcmc": {
        "proposal_scale": 0.5,
        "sweeps": 3600,
        "burn_in": 200,
        "thin": 32,
    },
    "observables": [
        {"kind": "plaquette", "base": [0, 0], "axes": [0, 1]},
    ],
}


def default_config_dict() -> dict[str, Any]:
    import copy

    return copy.deepcopy(_DEFAULTS)


def _emit_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, list):
        return "[" + ", ".join(_emit_value(x) for x in v) + "]"
    raise TypeError(f"cannot emit {type(v)}")


def default_config_text() -> str:
    """The full default configuration as a TOML document."""
    out = io.StringIO()
    cfg = default_config_dict()
    for section in ("model", "experiment", "integrator", "mcmc"):
        out.write(f"[{section}]\n")
        for k, v in cfg[section].items():
            out.write(f"{k} = {_emit_value(v)}\n")
        out.write("\n")
    for obs in cfg["observables"]:
        out.write("[[observables]]\n")
        for k, v in obs.items():
            out.write(f"{k} = {_emit_value(v)}\n")
        out.write("\n")
    return out.getvalue()


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration with derived model objects."""

    raw: dict
    group: GroupSpec
    lattice: LatticeSpec
    params: CouplingParams
    kind: str
    seed: int
    output: str
    weight_a: float
    n_pairs: int
    fit_start: float
    checkpoint_every: int
    integrator: dict
    mcmc: dict
    observables: tuple = field(default_factory=tuple)

    @property
    def admissible(self) -> bool:
        return self.params.admissible

    @property
    def beta_threshold(self) -> float:
        return self.params.beta_threshold


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for k, v in override.items():
        where = f"{path}.{k}" if path else k
        if k not in base:
            raise ConfigError(f"unknown configuration key: {where}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{where} must be a table")
            out[k] = _merge(base[k], v, where)
        else:
            out[k] = v
    return out


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _build_loop(lat: LatticeSpec, obs: dict, i: int):
    where = f"observables[{i}]"
    kind = obs.get("kind")
    _require(kind in ("plaquette", "rectangle"), f"{where}.kind must be plaquette or rectangle")
    base = tuple(obs.get("base", [0] * lat.d))
    _require(
        len(base) == lat.d and all(isinstance(c, int) and 0 <= c < lat.L for c in base),
        f"{where}.base must be {lat.d} coordinates in [0, {lat.L})",
    )
    axes = obs.get("axes", [0, 1])
    _require(
        len(axes) == 2 and all(isinstance(a, int) and 0 <= a < lat.d for a in axes)
        and axes[0] != axes[1],
        f"{where}.axes must be two distinct axes below {lat.d}",
    )
    mu, nu = min(axes), max(axes)
    if kind == "plaquette":
        return ("plaquette", base, (mu, nu)), plaquette_at(lat, base, mu, nu)
    extents = obs.get("extents", [2, 1])
    _require(
        len(extents) == 2 and all(isinstance(x, int) and 1 <= x <= lat.L for x in extents),
        f"{where}.extents must be two lengths in [1, L]",
    )
    return (
        ("rectangle", base, (mu, nu), tuple(extents)),
        rectangle_loop(lat, base, mu, nu, extents[0], extents[1]),
    )


def parse_config(data: dict) -> RunConfig:
    """Validate a raw configuration mapping against the full schema."""
    merged = _merge(
        {k: v for k, v in _DEFAULTS.items() if k != "observables"},
        {k: v for k, v in data.items() if k != "observables"},
    )
    merged["observables"] = data.get("observables", default_config_dict()["observables"])

    m = merged["model"]
    _require(m["group"] in ("SO", "SU"), "model.group must be SO or SU")
    _require(isinstance(m["n"], int) and m["n"] >= 2, "model.n must be an integer >= 2")
    _require(isinstance(m["d"], int) and m["d"] >= 2, "model.d must be an integer >= 2")
    _require(isinstance(m["L"], int) and m["L"] >= 2, "model.L must be an integer >= 2")
    _require(isinstance(m["beta"], (int, float)), "model.beta must be a number")

    e = merged["experiment"]
    _require(e["kind"] in EXPERIMENT_KINDS, f"experiment.kind must be one of {EXPERIMENT_KINDS}")
    _require(isinstance(e["seed"], int) and e["seed"] >= 0, "experiment.seed must be >= 0")
    _require(
        isinstance(e["weight_a"], (int, float)) and e["weight_a"] > 1,
        "experiment.weight_a must exceed 1",
    )
    _require(isinstance(e["n_pairs"], int) and e["n_pairs"] >= 2, "experiment.n_pairs must be >= 2")
    _require(
        isinstance(e["checkpoint_every"], int) and e["checkpoint_every"] >= 0,
        "experiment.checkpoint_every must be >= 0",
    )

    it = merged["integrator"]
    _require(it["step_size"] >= 0, "integrator.step_size must be >= 0 (0 selects the default)")
    _require(isinstance(it["n_steps"], int) and it["n_steps"] >= 1, "integrator.n_steps must be >= 1")
    _require(
        isinstance(it["burn_in"], int) and 0 <= it["burn_in"] < it["n_steps"],
        "integrator.burn_in must lie in [0, n_steps)",
    )
    _require(isinstance(it["thin"], int) and it["thin"] >= 1, "integrator.thin must be >= 1")
    _require(
        isinstance(it["reunitarize_every"], int) and it["reunitarize_every"] >= 1,
        "integrator.reunitarize_every must be >= 1",
    )
    _require(
        isinstance(it["measure_every"], int) and it["measure_every"] >= 1,
        "integrator.measure_every must be >= 1",
    )

    mc = merged["mcmc"]
    _require(0 < mc["proposal_scale"] < 3.141592653589793, "mcmc.proposal_scale must lie in (0, pi)")
    _require(isinstance(mc["sweeps"], int) and mc["sweeps"] >= 1, "mcmc.sweeps must be >= 1")
    _require(
        isinstance(mc["burn_in"], int) and 0 <= mc["burn_in"] < mc["sweeps"],
        "mcmc.burn_in must lie in [0, sweeps)",
    )
    _require(isinstance(mc["thin"], int) and mc["thin"] >= 1, "mcmc.thin must be >= 1")

    group = GroupSpec(m["group"], m["n"])
    try:
        lattice = LatticeSpec(d=m["d"], L=m["L"])
        params = CouplingParams(group=group, beta=float(m["beta"]), d=m["d"])
    except ValueError as err:
        raise ConfigError(str(err)) from err

    loops = []
    for i, obs in enumerate(merged["observables"]):
        _require(isinstance(obs, dict), f"observables[{i}] must be a table")
        loops.append(_build_loop(lattice, obs, i))

    merged["experiment"]["admissible"] = params.admissible
    merged["experiment"]["beta_threshold"] = params.beta_threshold
    return RunConfig(
        raw=merged,
        group=group,
        lattice=lattice,
        params=params,
        kind=e["kind"],
        seed=e["seed"],
        output=e["output"],
        weight_a=float(e["weight_a"]),
        n_pairs=e["n_pairs"],
        fit_start=float(e["fit_start"]),
        checkpoint_every=e["checkpoint_every"],
        integrator=dict(it),
        mcmc=dict(mc),
        observables=tuple(loops),
    )


def load_config(path: str) -> RunConfig:
    """Parse and validate a TOML configuration file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"malformed TOML: {err}") from err
    return parse_config(data)
