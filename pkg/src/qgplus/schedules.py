"""Step-size schedules and growth functions.

Indexing convention for step-sizes: ``t`` starts at 0 and is the index of the
step producing ``x_{t+1}``. The harmonic schedule therefore emits
``c / (t + 2)``, which is ``c / (k + 1)`` for the heavy-ball step ``k = t + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np


@lru_cache(maxsize=None)
def _u_tuple(n: int) -> tuple[float, ...]:
    u = [1.0]
    for _ in range(n):
        half = u[-1] / 2.0
        u.append(half + math.sqrt(half * half + 2.0))
    return tuple(u)


def u_sequence(n: int) -> np.ndarray:
    """``u_0 .. u_n`` with ``u_0 = 1`` and ``u_k = u_{k-1}/2 + sqrt((u_{k-1}/2)^2 + 2)``.

    Every term satisfies ``u_k^2 = u_k u_{k-1} + 2``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return np.array(_u_tuple(int(n)))


@dataclass(frozen=True)
class StepSchedule:
    """One of ``constant``, ``harmonic``, ``decreasing-u`` or ``custom``."""

    kind: str
    gamma: float | None = None
    c: float | None = None
    L: float | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        need = {"constant": "gamma", "harmonic": "c", "decreasing-u": "L", "custom": "values"}
        if self.kind not in need:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        p = getattr(self, need[self.kind])
        if p is None:
            raise ValueError(f"{self.kind} schedule needs {need[self.kind]!r}")
        if self.kind == "custom":
            if any(not v > 0 for v in self.values):
                raise ValueError("step-sizes must be positive")
        elif not p > 0:
            raise ValueError("step-sizes must be positive")

    @classmethod
    def constant(cls, gamma: float) -> "StepSchedule":
        return cls("constant", gamma=gamma)

    @classmethod
    def harmonic(cls, c: float) -> "StepSchedule":
        return cls("harmonic", c=c)

    @classmethod
    def decreasing_u(cls, L: float) -> "StepSchedule":
        return cls("decreasing-u", L=L)

    @classmethod
    def custom(cls, values: Sequence[float]) -> "StepSchedule":
        return cls("custom", values=tuple(float(v) for v in values))

    def __call__(self, t: int) -> float:
        return schedule_gamma(self, t)

    def first(self, n: int) -> np.ndarray:
        return np.array([schedule_gamma(self, t) for t in range(n)])


def schedule_gamma(schedule: StepSchedule, t: int) -> float:
    if t < 0:
        raise IndexError("t must be nonnegative")
    if schedule.kind == "constant":
        return schedule.gamma
    if schedule.kind == "harmonic":
        return schedule.c / (t + 2)
    if schedule.kind == "decreasing-u":
        return 1.0 / (schedule.L * _u_tuple(t + 1)[t + 1])
    if t >= len(schedule.values):
        raise IndexError(f"custom schedule exhausted at t={t}")
    return schedule.values[t]


@dataclass(frozen=True)
class GrowthFn:
    """Concave increasing ``h`` with ``h(0) = 0``.

    ``linear``: ``L z / 2``; ``sqrt``: ``M sqrt(z)``; ``mixed``: ``M sqrt(z) + L z / 2``.
    """

    kind: str
    L: float | None = None
    M: float | None = None

    def __post_init__(self):
        need = {"linear": ("L",), "sqrt": ("M",), "mixed": ("M", "L")}
        if self.kind not in need:
            raise ValueError(f"unknown growth kind {self.kind!r}")
        for p in need[self.kind]:
            v = getattr(self, p)
            if v is None or not v > 0:
                raise ValueError(f"{self.kind} growth needs positive {p}")

    @classmethod
    def linear(cls, L):
        return cls("linear", L=L)

    @classmethod
    def sqrt(cls, M):
        return cls("sqrt", M=M)

    @classmethod
    def mixed(cls, M, L):
        return cls("mixed", M=M, L=L)

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z: float) -> float:
        if z < 0:
            raise ValueError("growth functions are defined on z >= 0")
        if self.kind == "linear":
            return 0.5 * self.L * z
        if self.kind == "sqrt":
            return self.M * math.sqrt(z)
        return self.M * math.sqrt(z) + 0.5 * self.L * z

    def deriv(self, z: float) -> float:
        if self.kind == "linear":
            return 0.5 * self.L
        if z <= 0:
            return math.inf
        if self.kind == "sqrt":
            return self.M / (2.0 * math.sqrt(z))
        return self.M / (2.0 * math.sqrt(z)) + 0.5 * self.L

    def inverse(self, y: float) -> float:
        return growth_inverse(self, y)

    def inv_deriv_at_level(self, y: float) -> float:
        """``1 / h'(h^{-1}(y))`` in a form that stays finite at ``y = 0``."""
        if y < 0:
            raise ValueError("level must be nonnegative")
        if self.kind == "linear":
            return 2.0 / self.L
        if self.kind == "sqrt":
            return 2.0 * y / self.M**2
        s = _mixed_root(self.M, self.L, y)
        return 2.0 * s / (self.M + self.L * s)


def _mixed_root(M, L, y):
    # positive root s of (L/2) s^2 + M s - y = 0, written to avoid cancellation
    return 2.0 * y / (M + math.sqrt(M * M + 2.0 * L * y))


def growth_inverse(h: GrowthFn, y: float) -> float:
    if y < 0:
        raise ValueError("growth_inverse needs y >= 0")
    if h.kind == "linear":
        return 2.0 * y / h.L
    if h.kind == "sqrt":
        return (y / h.M) ** 2
    return _mixed_root(h.M, h.L, y) ** 2


def make_schedule(spec: dict) -> StepSchedule:
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "custom":
        return StepSchedule.custom(spec.pop("values"))
    return StepSchedule(kind, **spec)


def make_growth(spec: dict) -> GrowthFn:
    spec = dict(spec)
    return GrowthFn(spec.pop("kind"), **spec)
