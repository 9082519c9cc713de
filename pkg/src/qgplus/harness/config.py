"""Experiment configuration files (YAML).

Schema (unknown keys anywhere are errors)::

    experiment: name                 # required
    n: 20                            # required, steps per run
    seeds: {count: 1, base: 0}       # optional
    instances:                       # required (``instance:`` for a single one)
      - id: huber
        params: {L: 1, delta: 1}     # builder keyword arguments
        x0: [11]                     # optional start; default per instance or seeded
    algorithms:                      # required (``algorithm:`` for a single one)
      - id: subgrad                  # subgrad | subgrad-els | hb | hb-ls | hb-rg | hb-restart
        schedule: {kind: constant, gamma: 1}
        growth: {kind: sqrt, M: 1}
        kappa: 4
        f_star: 0                    # default: the instance's f*
        L: 1                         # default: the instance's QG+ tag
        form: momentum               # hb only
        policy: first-active
        ls_pick: first
    checks:                          # optional
      - bound: hb-optimal            # any bound id
        side: upper                  # default: the bound's natural side
        params: {L: 1}               # default: taken from instance/run
        rel_tol: 0
        abs_tol: 1.0e-8
        algorithms: [hb]             # optional filter
      - property: lyapunov-monotone  # or eq4-residual
        tol: 1.0e-10
    output: {dir: results, traces: true}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..algos import RUNNERS
from ..bounds import BOUND_IDS
from ..core import BOUND_SLACK, POLICIES
from ..schedules import GrowthFn, StepSchedule, make_growth, make_schedule
from .registry import BUILDERS, instance_params

PROPERTIES = ("lyapunov-monotone", "eq4-residual")


class ConfigError(ValueError):
    pass


def _keys(where: str, doc, allowed, required=()):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(doc).__name__}")
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ConfigError(f"{where}: missing key(s) {missing}")


@dataclass
class InstanceSpec:
    id: str
    params: dict = field(default_factory=dict)
    x0: list | None = None


@dataclass
class AlgorithmSpec:
    id: str
    schedule: StepSchedule | None = None
    growth: GrowthFn | None = None
    kappa: float | None = None
    f_star: float | None = None
    L: float | None = None
    form: str = "momentum"
    policy: str = "first-active"
    ls_pick: str = "first"


@dataclass
class CheckSpec:
    bound: str | None = None
    prop: str | None = None
    side: str | None = None
    params: dict = field(default_factory=dict)
    rel_tol: float = 0.0
    abs_tol: float = BOUND_SLACK
    tol: float | None = None
    algorithms: tuple | None = None

    @property
    def name(self):
        return self.bound or self.prop

    def applies_to(self, algorithm_id: str) -> bool:
        return self.algorithms is None or algorithm_id in self.algorithms


@dataclass
class ExperimentConfig:
    experiment: str
    n: int
    instances: list
    algorithms: list
    checks: list = field(default_factory=list)
    seed_count: int = 1
    base_seed: int = 0
    out_dir: str = "results"
    traces: bool = True


def _instance(i, doc):
    where = f"instances[{i}]"
    _keys(where, doc, ("id", "params", "x0"), ("id",))
    if doc["id"] not in BUILDERS:
        raise ConfigError(f"{where}: unknown instance id {doc['id']!r}")
    params = doc.get("params") or {}
    _keys(f"{where}.params", params, instance_params(doc["id"]))
    return InstanceSpec(doc["id"], dict(params), doc.get("x0"))


def _algorithm(i, doc):
    where = f"algorithms[{i}]"
    _keys(where, doc, ("id", "schedule", "growth", "kappa", "f_star", "L", "form", "policy", "ls_pick"), ("id",))
    if doc["id"] not in RUNNERS:
        raise ConfigError(f"{where}: unknown algorithm {doc['id']!r}; choose from {sorted(RUNNERS)}")
    try:
        schedule = make_schedule(doc["schedule"]) if "schedule" in doc else None
        growth = make_growth(doc["growth"]) if "growth" in doc else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    if doc.get("policy", "first-active") not in POLICIES:
        raise ConfigError(f"{where}: unknown policy {doc['policy']!r}")
    if doc.get("form", "momentum") not in ("averaged", "momentum"):
        raise ConfigError(f"{where}: form must be averaged or momentum")
    if doc.get("ls_pick", "first") not in ("first", "farthest"):
        raise ConfigError(f"{where}: ls_pick must be first or farthest")
    if doc["id"] == "subgrad" and schedule is None:
        raise ConfigError(f"{where}: subgrad needs a schedule")
    if doc["id"] in ("hb-rg", "hb-restart") and growth is None:
        raise ConfigError(f"{where}: {doc['id']} needs a growth function")
    if doc["id"] == "hb-restart" and doc.get("kappa") is None:
        raise ConfigError(f"{where}: hb-restart needs kappa")
    return AlgorithmSpec(
        doc["id"], schedule, growth, doc.get("kappa"), doc.get("f_star"), doc.get("L"),
        doc.get("form", "momentum"), doc.get("policy", "first-active"), doc.get("ls_pick", "first"),
    )


def _check(i, doc):
    where = f"checks[{i}]"
    _keys(where, doc, ("bound", "property", "side", "params", "rel_tol", "abs_tol", "tol", "algorithms"))
    if ("bound" in doc) == ("property" in doc):
        raise ConfigError(f"{where}: give exactly one of 'bound' or 'property'")
    if "bound" in doc and doc["bound"] not in BOUND_IDS:
        raise ConfigError(f"{where}: unknown bound {doc['bound']!r}")
    if "property" in doc and doc["property"] not in PROPERTIES:
        raise ConfigError(f"{where}: unknown property {doc['property']!r}")
    if doc.get("side", "upper") not in ("upper", "lower"):
        raise ConfigError(f"{where}: side must be upper or lower")
    params = doc.get("params") or {}
    _keys(f"{where}.params", params, ("L", "M", "kappa", "growth"))
    if "growth" in params:
        params = {**params, "growth": make_growth(params["growth"])}
    algos = doc.get("algorithms")
    return CheckSpec(
        doc.get("bound"), doc.get("property"), doc.get("side"), params,
        float(doc.get("rel_tol", 0.0)), float(doc.get("abs_tol", BOUND_SLACK)),
        None if doc.get("tol") is None else float(doc["tol"]),
        None if algos is None else tuple(algos),
    )


def parse_config(doc) -> ExperimentConfig:
    top = ("experiment", "n", "seeds", "instances", "instance", "algorithms", "algorithm", "checks", "output")
    _keys("config", doc, top, ("experiment", "n"))
    for plural in ("instances", "algorithms"):
        single = plural[:-1]
        if (plural in doc) == (single in doc):
            raise ConfigError(f"config: give exactly one of {plural!r} or {single!r}")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ConfigError("config: n must be a positive integer")
    seeds = doc.get("seeds") or {}
    _keys("seeds", seeds, ("count", "base"))
    count = seeds.get("count", 1)
    if not isinstance(count, int) or count < 1:
        raise ConfigError("seeds.count must be a positive integer")
    output = doc.get("output") or {}
    _keys("output", output, ("dir", "traces"))
    insts = doc.get("instances") or [doc.get("instance")]
    algs = doc.get("algorithms") or [doc.get("algorithm")]
    if not isinstance(insts, list) or not isinstance(algs, list) or not insts or not algs:
        raise ConfigError("config: instances and algorithms must be nonempty lists")
    return ExperimentConfig(
        experiment=str(doc["experiment"]),
        n=n,
        instances=[_instance(i, d) for i, d in enumerate(insts)],
        algorithms=[_algorithm(i, d) for i, d in enumerate(algs)],
        checks=[_check(i, d) for i, d in enumerate(doc.get("checks") or [])],
        seed_count=count,
        base_seed=int(seeds.get("base", 0)),
        out_dir=str(output.get("dir", "results")),
        traces=bool(output.get("traces", True)),
    )


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}") from exc
    return parse_config(doc)
