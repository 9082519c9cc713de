"""Closed-form worst-case bounds and trace verification against them."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import BOUND_SLACK, IterateTrace, Oracle, distance_to_optset, pr_average
from .schedules import GrowthFn, StepSchedule, u_sequence

BOUND_IDS = (
    "avg-qg",
    "last-lb-qg",
    "last-lb-smooth",
    "last-lb-combined",
    "conjecture-u",
    "first-order-lb",
    "hb-optimal",
    "rg-general",
    "lipschitz-opt",
    "restart-dist",
    "restart-value",
    "els-stuck",
)

_NEEDS = {
    "avg-qg": ("L", "R", "n"),
    "hb-optimal": ("L", "R", "n"),
    "first-order-lb": ("L", "R", "n"),
    "last-lb-qg": ("L", "R", "n", "gammas"),
    "last-lb-smooth": ("L", "R", "n", "gammas"),
    "last-lb-combined": ("L", "R", "n", "gammas"),
    "conjecture-u": ("L", "R", "n"),
    "rg-general": ("growth", "R", "n"),
    "lipschitz-opt": ("M", "R", "n"),
    "restart-dist": ("kappa", "R", "n"),
    "restart-value": ("kappa", "growth", "R", "n"),
    "els-stuck": ("L", "R"),
}

# Which side of the inequality each bound is meant for.
SIDE = {
    "avg-qg": "upper",
    "hb-optimal": "upper",
    "conjecture-u": "upper",
    "rg-general": "upper",
    "lipschitz-opt": "upper",
    "restart-dist": "upper",
    "restart-value": "upper",
    "first-order-lb": "lower",
    "last-lb-qg": "lower",
    "last-lb-smooth": "lower",
    "last-lb-combined": "lower",
    "els-stuck": "lower",
}


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class BoundSpec:
    id: str
    L: float | None = None
    M: float | None = None
    R: float | None = None
    n: int | None = None
    gammas: tuple | None = None
    growth: GrowthFn | None = None
    kappa: float | None = None

    def __post_init__(self):
        if self.id not in _NEEDS:
            raise BoundError(f"unknown bound id {self.id!r}")
        if self.gammas is not None and not isinstance(self.gammas, tuple):
            object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if self.n is not None and self.n < 0:
            raise BoundError("n must be nonnegative")
        if self.gammas is not None and self.n is not None and len(self.gammas) < self.n:
            raise BoundError(f"need {self.n} step-sizes, got {len(self.gammas)}")

    def missing(self) -> list[str]:
        return [p for p in _NEEDS[self.id] if getattr(self, p) is None]

    @classmethod
    def with_schedule(cls, id: str, schedule: StepSchedule, n: int, **kw) -> "BoundSpec":
        return cls(id, n=n, gammas=tuple(schedule.first(n)), **kw)


def _contraction(kappa):
    return 1.0 - 1.0 / (kappa * math.e)


def bound_value(spec: BoundSpec) -> float:
    """The scalar bound; ``R`` and ``n`` may be left out of a spec until then."""
    missing = spec.missing()
    if missing:
        raise BoundError(f"bound {spec.id} needs {', '.join(missing)}")
    i, L, M, R, n = spec.id, spec.L, spec.M, spec.R, spec.n
    R2 = R * R
    if i in ("avg-qg", "hb-optimal", "first-order-lb"):
        return 0.5 * L * R2 / (n + 1)
    if i == "last-lb-qg":
        return 0.5 * L * L * spec.gammas[n - 1] * R2
    if i == "last-lb-smooth":
        return 0.5 * L * R2 / (1.0 + 2.0 * L * sum(spec.gammas[:n]))
    if i == "last-lb-combined":
        return max(bound_value(replace(spec, id="last-lb-qg")), bound_value(replace(spec, id="last-lb-smooth")))
    if i == "conjecture-u":
        return L * R2 / (2.0 * u_sequence(n)[n])
    if i == "rg-general":
        return spec.growth(R2 / (n + 1))
    if i == "lipschitz-opt":
        return M * R / math.sqrt(n + 1)
    if i == "restart-dist":
        return _contraction(spec.kappa) ** n * R2
    if i == "restart-value":
        return spec.growth(math.e * _contraction(spec.kappa) ** n * R2)
    return L * R2 / 6.0  # els-stuck


@dataclass
class BoundReport:
    id: str
    side: str
    ok: bool
    observed: float
    bound: float
    slack: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def observed_quantity(trace: IterateTrace, oracle: Oracle, bound_id: str) -> tuple[float, dict]:
    gaps = trace.values - oracle.f_star
    if bound_id == "avg-qg":
        return float(np.mean(gaps)), {}
    if bound_id == "restart-dist":
        return distance_to_optset(oracle, trace.last) ** 2, {}
    if bound_id == "els-stuck":
        final = float(gaps[-1])
        pr = oracle.value(pr_average(trace)) - oracle.f_star
        return min(final, pr), {"final_gap": final, "pr_gap": pr}
    return float(gaps[-1]), {}


def verify_trace_against_bound(
    trace: IterateTrace,
    oracle: Oracle,
    spec: BoundSpec,
    side: str | None = None,
    rel_tol: float = 0.0,
    abs_tol: float = BOUND_SLACK,
) -> BoundReport:
    """Compare a run with a bound.

    ``R`` is always recomputed as ``d(x_0, X*)`` from the oracle's projection,
    and ``n`` defaults to the trace length. ``upper`` passes when
    ``observed <= bound + tol`` and ``lower`` when ``observed >= bound - tol``,
    with ``tol = abs_tol + rel_tol * bound``.
    """
    side = side or SIDE[spec.id]
    if side not in ("upper", "lower"):
        raise BoundError(f"side must be upper or lower, got {side!r}")
    R = distance_to_optset(oracle, trace.x0)
    spec = replace(spec, R=R, n=trace.n if spec.n is None else spec.n)
    bound = bound_value(spec)
    observed, extra = observed_quantity(trace, oracle, spec.id)
    slack = bound - observed if side == "upper" else observed - bound
    tol = abs_tol + rel_tol * abs(bound)
    return BoundReport(spec.id, side, bool(slack >= -tol), observed, bound, slack, {"R": R, "n": spec.n, **extra})


def bound_sequence(spec: BoundSpec, ns: Sequence[int]) -> np.ndarray:
    return np.array([bound_value(replace(spec, n=int(n))) for n in ns])
