"""Instances addressable by string id, and the seeded random battery."""

from __future__ import annotations

import inspect
from dataclasses import dataclass, field

import numpy as np

from ..core import Oracle
from ..interp import random_valid_instance
from ..zoo import (
    ResistingOracle,
    cycle_abs,
    cycle_linf,
    huber_oracle,
    lb3d_instance,
    mixed_oracle,
    quadratic_diag_oracle,
    supnorm_oracle,
    supnormsq_oracle,
)

BATTERY_DIMS = (2, 3, 5)
BATTERY_POINTS = tuple(range(3, 9))
START_RADIUS = 3.0


@dataclass
class Instance:
    id: str
    oracle: Oracle
    x0: np.ndarray | None = None
    extras: dict = field(default_factory=dict)


def _huber(L=1.0, delta=1.0, dim=1):
    return Instance("huber", huber_oracle(L, delta, dim))


def _supnormsq(L=1.0, d=2, tie_policy="lowest-index"):
    return Instance("supnormsq", supnormsq_oracle(L, d, tie_policy))


def _lb3d(L=1.0, n=5, gammas=None, eta=1e-4):
    inst = lb3d_instance(L, n, gammas, eta)
    return Instance("lb3d", inst.oracle, inst.x0, {"predicted_gap": inst.predicted_gap, "gammas": inst.gammas})


def _cycle_abs(M=1.0, gamma=1.0):
    c = cycle_abs(M, gamma)
    return Instance("cycle-abs", c.oracle, c.x0, {"cycle": c})


def _cycle_linf(kind="sq", L=1.0, M=1.0):
    c = cycle_linf(kind, L, M)
    return Instance("cycle-linf", c.oracle, c.x0, {"cycle": c})


def _quad_diag(mu=1.0, L=1.0, d=2):
    return Instance("quad-diag", quadratic_diag_oracle(mu, L, d))


def _abs(M=1.0):
    return Instance("abs", supnorm_oracle(M, 1))


def _supnorm(M=1.0, d=2, tie_policy="lowest-index"):
    return Instance("supnorm", supnorm_oracle(M, d, tie_policy))


def _mixed(M=1.0, L=1.0, dim=1, delta=float("inf")):
    return Instance("mixed", mixed_oracle(M, L, dim, delta))


def _resisting(L=1.0, n=1, mode="vertex"):
    o = ResistingOracle(L, n, mode)
    return Instance("resisting", o, o.start)


def _interp(d=2, num_points=4, L=1.0, seed=0):
    ds, oracle = random_valid_instance(seed, d, num_points, L)
    return Instance("interp", oracle, None, {"dataset": ds})


BUILDERS = {
    "huber": _huber,
    "supnormsq": _supnormsq,
    "lb3d": _lb3d,
    "cycle-abs": _cycle_abs,
    "cycle-linf": _cycle_linf,
    "quad-diag": _quad_diag,
    "abs": _abs,
    "supnorm": _supnorm,
    "mixed": _mixed,
    "resisting": _resisting,
    "interp": _interp,
}


def instance_params(instance_id: str) -> list[str]:
    return list(inspect.signature(BUILDERS[instance_id]).parameters)


def make_instance(instance_id: str, params: dict | None = None, seed: int = 0) -> Instance:
    """Build a registered instance; ``interp`` takes its seed from ``seed``
    unless ``params`` sets one."""
    if instance_id not in BUILDERS:
        raise KeyError(f"unknown instance id {instance_id!r}; known: {sorted(BUILDERS)}")
    params = dict(params or {})
    allowed = instance_params(instance_id)
    unknown = set(params) - set(allowed)
    if unknown:
        raise KeyError(f"instance {instance_id!r} has no parameter(s) {sorted(unknown)}; allowed: {allowed}")
    if instance_id == "interp":
        params.setdefault("seed", seed)
    return BUILDERS[instance_id](**params)


def random_start(seed: int, dim: int, radius: float = START_RADIUS) -> np.ndarray:
    return np.random.default_rng([int(seed), dim, 104729]).uniform(-radius, radius, size=dim)


@dataclass
class BatteryItem:
    index: int
    seed: int
    d: int
    num_points: int
    L: float
    dataset: object
    oracle: Oracle
    x0: np.ndarray


def interp_battery(size: int = 100, base_seed: int = 0, dims=BATTERY_DIMS, points=BATTERY_POINTS):
    """Seeded random interpolation instances with random ``L`` in ``[0.5, 2]``
    and random starting points; identical for identical arguments."""
    items = []
    for i in range(size):
        rng = np.random.default_rng([int(base_seed), i])
        d = int(rng.choice(dims))
        m = int(rng.choice(points))
        L = float(rng.uniform(0.5, 2.0))
        seed = int(rng.integers(2**31))
        ds, oracle = random_valid_instance(seed, d, m, L)
        x0 = rng.uniform(-START_RADIUS, START_RADIUS, size=d)
        items.append(BatteryItem(i, seed, d, m, L, ds, oracle, x0))
    return items
