"""YAML scenario/optimization configuration: load, validate, normalize, hash.

A config file has three top-level sections: ``scenario``, ``optimization``
and ``quadrature``.  Loading produces validated dataclasses; every
validation failure raises ConfigError naming the offending field with
its dotted path.  `normalize` reproduces the config as a plain dict
with all defaults filled in, so an echoed config re-parses to an
identical validated scenario.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass

import numpy as np
import yaml

from .attrition import WeaponParams
from .engagement import AttackerInit, DefenderInit, HvuPath, ScenarioConfig
from .errors import ConfigError
from .models import Model1Params, Model2Params, SwarmModel
from .quadrature import SCHEMES, ParamDomain
from .solver import OptimizationConfig


@dataclass
class RunConfig:
    scenario: ScenarioConfig
    optimization: OptimizationConfig
    scheme: str
    nodes: int


def _section(data: dict, key: str) -> dict:
    if key not in data:
        raise ConfigError(f"{key}: missing section")
    if not isinstance(data[key], dict):
        raise ConfigError(f"{key}: expected a mapping")
    return data[key]


def _req(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"{path}.{key}: missing")
    return d[key]


def _num(d: dict, key: str, path: str, default=None) -> float:
    val = d.get(key, default)
    if val is None:
        raise ConfigError(f"{path}.{key}: missing")
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    return float(val)


def _int(d: dict, key: str, path: str, default=None) -> int:
    val = d.get(key, default)
    if val is None:
        raise ConfigError(f"{path}.{key}: missing")
    if not isinstance(val, int) or isinstance(val, bool):
        raise ConfigError(f"{path}.{key}: expected an integer, got {val!r}")
    return val


def _parse_model(d: dict) -> SwarmModel:
    kind = _req(d, "kind", "scenario.model")
    params = _req(d, "params", "scenario.model")
    if kind == "vbap":
        cls = Model1Params
    elif kind == "reynolds":
        cls = Model2Params
    else:
        raise ConfigError(f"scenario.model.kind: unknown kind {kind!r}")
    names = [f.name for f in dataclasses.fields(cls)]
    for extra in set(params) - set(names):
        raise ConfigError(f"scenario.model.params.{extra}: unknown parameter for {kind}")
    kwargs = {name: _num(params, name, "scenario.model.params") for name in names}
    try:
        return SwarmModel(kind, cls(**kwargs))
    except ValueError as err:
        raise ConfigError(f"scenario.model.params: {err}") from err


def _parse_weapons(d: dict) -> WeaponParams:
    kwargs = {name: _num(d, name, "scenario.weapons") for name in ("lambda_d", "sigma_d", "lambda_a", "sigma_a")}
    for opt in ("hvu_lambda", "hvu_sigma"):
        if d.get(opt) is not None:
            kwargs[opt] = _num(d, opt, "scenario.weapons")
    try:
        return WeaponParams(**kwargs)
    except ValueError as err:
        raise ConfigError(f"scenario.weapons: {err}") from err


def _parse_uncertain(d: dict | None) -> ParamDomain | None:
    if d is None:
        return None
    try:
        return ParamDomain(
            name=str(_req(d, "name", "scenario.uncertain")),
            lower=_num(d, "lower", "scenario.uncertain"),
            upper=_num(d, "upper", "scenario.uncertain"),
            nominal=(None if d.get("nominal") is None else _num(d, "nominal", "scenario.uncertain")),
            prior=d.get("prior", "uniform"),
        )
    except ValueError as err:
        raise ConfigError(f"scenario.uncertain: {err}") from err


def _parse_scenario(s: dict) -> ScenarioConfig:
    att = _section(s, "attackers")
    dfn = _section(s, "defenders")
    hvu = s.get("hvu", {"kind": "static", "position": [0.0, 0.0, 0.0]})
    n = _int(s, "dim", "scenario", 3)

    attackers = AttackerInit(
        kind=att.get("kind", "lattice"),
        standoff=_num(att, "standoff", "scenario.attackers", 30.0),
        spacing=_num(att, "spacing", "scenario.attackers", 1.0),
        jitter=_num(att, "jitter", "scenario.attackers", 0.2),
        seed=_int(att, "seed", "scenario.attackers", 0),
        speed=_num(att, "speed", "scenario.attackers", 0.0),
        positions=(np.asarray(att["positions"], dtype=float) if att.get("positions") is not None else None),
        velocities=(np.asarray(att["velocities"], dtype=float) if att.get("velocities") is not None else None),
    )
    defenders = DefenderInit(
        kind=dfn.get("kind", "line"),
        distance=_num(dfn, "distance", "scenario.defenders", 12.0),
        spread=_num(dfn, "spread", "scenario.defenders", 8.0),
        positions=(np.asarray(dfn["positions"], dtype=float) if dfn.get("positions") is not None else None),
    )
    hvu_path = HvuPath(
        kind=hvu.get("kind", "static"),
        position=np.asarray(hvu.get("position", [0.0] * n), dtype=float),
        velocity=(np.asarray(hvu["velocity"], dtype=float) if hvu.get("velocity") is not None else None),
    )
    try:
        return ScenarioConfig(
            n=n,
            n_attackers=_int(att, "count", "scenario.attackers"),
            n_defenders=_int(dfn, "count", "scenario.defenders"),
            t_f=_num(s, "t_f", "scenario"),
            dt=_num(s, "dt", "scenario"),
            model=_parse_model(_section(s, "model")),
            weapons=_parse_weapons(_section(s, "weapons")),
            hvu=hvu_path,
            attackers=attackers,
            defenders=defenders,
            u_max=_num(s, "u_max", "scenario", 2.0),
            uncertain=_parse_uncertain(s.get("uncertain")),
        )
    except ValueError as err:
        raise ConfigError(f"scenario: {err}") from err


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root: expected a mapping")
    scenario = _parse_scenario(_section(data, "scenario"))
    o = data.get("optimization", {})
    try:
        opt = OptimizationConfig(
            max_iterations=_int(o, "max_iterations", "optimization", 200),
            gradient_tolerance=_num(o, "gradient_tolerance", "optimization", 1e-4),
            knots=_int(o, "knots", "optimization", max(2, int(round(scenario.t_f)))),
            armijo_c=_num(o, "armijo_c", "optimization", 1e-4),
            backtrack=_num(o, "backtrack", "optimization", 0.5),
            initial_step=_num(o, "initial_step", "optimization", 1.0),
        )
    except ValueError as err:
        raise ConfigError(f"optimization: {err}") from err
    q = data.get("quadrature", {})
    scheme = q.get("scheme", "trapezoid")
    if scheme not in SCHEMES:
        raise ConfigError(f"quadrature.scheme: unknown scheme {scheme!r}; choose from {SCHEMES}")
    nodes = _int(q, "nodes", "quadrature", 11)
    if nodes < 1:
        raise ConfigError(f"quadrature.nodes: must be >= 1, got {nodes}")
    return RunConfig(scenario=scenario, optimization=opt, scheme=scheme, nodes=nodes)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return parse_config(data)


def normalize(run: RunConfig) -> dict:
    """Plain-dict form with defaults filled in; re-parses to an identical config."""
    s = run.scenario
    att = {
        "count": s.n_attackers,
        "kind": s.attackers.kind,
        "standoff": s.attackers.standoff,
        "spacing": s.attackers.spacing,
        "jitter": s.attackers.jitter,
        "seed": s.attackers.seed,
        "speed": s.attackers.speed,
    }
    if s.attackers.positions is not None:
        att["positions"] = np.asarray(s.attackers.positions).tolist()
    if s.attackers.velocities is not None:
        att["velocities"] = np.asarray(s.attackers.velocities).tolist()
    dfn = {
        "count": s.n_defenders,
        "kind": s.defenders.kind,
        "distance": s.defenders.distance,
        "spread": s.defenders.spread,
    }
    if s.defenders.positions is not None:
        dfn["positions"] = np.asarray(s.defenders.positions).tolist()
    hvu = {"kind": s.hvu.kind, "position": np.asarray(s.hvu.position).tolist()}
    if s.hvu.velocity is not None:
        hvu["velocity"] = np.asarray(s.hvu.velocity).tolist()
    out = {
        "scenario": {
            "dim": s.n,
            "t_f": s.t_f,
            "dt": s.dt,
            "u_max": s.u_max,
            "attackers": att,
            "defenders": dfn,
            "hvu": hvu,
            "model": {"kind": s.model.kind, "params": dataclasses.asdict(s.model.params)},
            "weapons": {
                k: v
                for k, v in dataclasses.asdict(s.weapons).items()
                if v is not None
            },
        },
        "optimization": {
            "max_iterations": run.optimization.max_iterations,
            "gradient_tolerance": run.optimization.gradient_tolerance,
            "knots": run.optimization.knots,
            "armijo_c": run.optimization.armijo_c,
            "backtrack": run.optimization.backtrack,
            "initial_step": run.optimization.initial_step,
        },
        "quadrature": {"scheme": run.scheme, "nodes": run.nodes},
    }
    if s.uncertain is not None:
        out["scenario"]["uncertain"] = {
            "name": s.uncertain.name,
            "lower": s.uncertain.lower,
            "upper": s.uncertain.upper,
            "nominal": s.uncertain.nominal,
            "prior": s.uncertain.prior,
        }
    return out


def dump_config(run: RunConfig) -> str:
    return yaml.safe_dump(normalize(run), sort_keys=True)


def config_hash(run: RunConfig) -> str:
    return hashlib.sha256(dump_config(run).encode()).hexdigest()
