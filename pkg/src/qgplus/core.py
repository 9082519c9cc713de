"""Shared vocabulary: oracles, class tags, iterate traces and tolerances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

# Tolerances are kept in one place so tests can cite them.
FEAS_TOL = 1e-12
BOUND_SLACK = 1e-8
ACTIVE_TOL = 1e-10

FIRST_ACTIVE = "first-active"
LOWEST_INDEX = "lowest-index"
ADVERSARIAL = "adversarial"
ORTHOGONAL = "orthogonal"
POLICIES = (FIRST_ACTIVE, LOWEST_INDEX, ADVERSARIAL, ORTHOGONAL)


class OracleError(ValueError):
    """Raised when an oracle cannot answer a request."""


class NoProjectionError(OracleError):
    """The optimal set of this instance is not known analytically."""


# --- class tags ---


@dataclass(frozen=True)
class QGPlus:
    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")


@dataclass(frozen=True)
class Lipschitz:
    M: float

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")


@dataclass(frozen=True)
class RGPlus:
    growth: Any  # schedules.GrowthFn


@dataclass(frozen=True)
class ConvexOnly:
    pass


ClassTag = QGPlus | Lipschitz | RGPlus | ConvexOnly


def as_vec(x) -> np.ndarray:
    """Return ``x`` as a finite 1-D float array."""
    v = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite coordinates in {v}")
    return v


class Oracle:
    """Black-box first-order oracle for a convex function.

    Subclasses implement :meth:`value` and :meth:`active_subgradients`.  The
    latter returns the gradients of the pieces that are active at ``x`` (within
    ``tol * (1 + |f(x)|)`` of the max, default :data:`ACTIVE_TOL`), one per row, in the oracle's canonical order; their
    convex hull is contained in the subdifferential. For differentiable points
    it is a single row.
    """

    name = "oracle"

    def __init__(self, dim: int, f_star: float = 0.0, tags: Sequence[ClassTag] = ()):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)
        self.f_star = float(f_star)
        self.tags = tuple(tags) + (ConvexOnly(),)

    def value(self, x) -> float:
        raise NotImplementedError

    def active_subgradients(self, x, tol: float = ACTIVE_TOL) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> float:
        return self.value(x)

    def subgrad(self, x, policy: str = FIRST_ACTIVE, v=None) -> np.ndarray:
        if policy == ORTHOGONAL:
            from .linesearch import orthogonal_subgradient

            return orthogonal_subgradient(self, x, v)
        if policy not in POLICIES:
            raise ValueError(f"unknown selection policy {policy!r}")
        return self.active_subgradients(x)[0].copy()

    def project(self, x) -> np.ndarray:
        raise NoProjectionError(f"{self.name}: optimal set unknown")

    @property
    def has_projection(self) -> bool:
        try:
            self.project(np.zeros(self.dim))
        except NoProjectionError:
            return False
        return True

    def reset(self) -> None:
        """Clear any per-run state (stateful oracles only)."""

    def tag(self, kind):
        for t in self.tags:
            if isinstance(t, kind):
                return t
        return None

    @property
    def L(self) -> float | None:
        t = self.tag(QGPlus)
        return None if t is None else t.L

    def gap(self, x) -> float:
        return self.value(x) - self.f_star


class MaxOracle(Oracle):
    """Pointwise maximum of convex pieces.

    ``pieces`` is a list of ``(value_fn, grad_fn)`` pairs. Active pieces are
    those within ``ACTIVE_TOL * (1 + |f(x)|)`` of the max, reported in list
    order so that the first active piece is the lowest-index one.
    """

    def __init__(self, pieces, dim, f_star=0.0, tags=(), projector=None, name="max"):
        super().__init__(dim, f_star, tags)
        self.pieces = list(pieces)
        self._projector = projector
        self.name = name

    def piece_values(self, x) -> np.ndarray:
        x = as_vec(x)
        return np.array([p[0](x) for p in self.pieces])

    def value(self, x) -> float:
        return float(np.max(self.piece_values(x)))

    def active_subgradients(self, x, tol=ACTIVE_TOL) -> np.ndarray:
        x = as_vec(x)
        vals = self.piece_values(x)
        top = vals.max()
        idx = np.flatnonzero(vals >= top - tol * (1.0 + abs(top)))
        return np.array([self.pieces[i][1](x) for i in idx])

    def project(self, x):
        if self._projector is None:
            return super().project(x)
        return self._projector(as_vec(x))


class SmoothOracle(Oracle):
    """Differentiable convex function given by value and gradient callables."""

    def __init__(self, fun, grad, dim, f_star=0.0, tags=(), projector=None, name="smooth"):
        super().__init__(dim, f_star, tags)
        self._fun = fun
        self._grad = grad
        self._projector = projector
        self.name = name

    def value(self, x):
        return float(self._fun(as_vec(x)))

    def active_subgradients(self, x, tol=ACTIVE_TOL):
        return np.atleast_2d(self._grad(as_vec(x)).astype(float))

    def project(self, x):
        if self._projector is None:
            return super().project(x)
        return self._projector(as_vec(x))


@dataclass
class IterateTrace:
    """Record of one algorithm run.

    ``subgrads`` holds ``g_0 .. g_n`` when the runner also queried the final
    point (all runners in this package do), so ``len(subgrads) >= n``.
    """

    points: np.ndarray
    values: np.ndarray
    subgrads: np.ndarray
    gammas: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.values = np.asarray(self.values, dtype=float)
        self.subgrads = np.asarray(self.subgrads, dtype=float).reshape(-1, self.points.shape[1])
        self.gammas = np.asarray(self.gammas, dtype=float)
        n = self.n
        if len(self.values) != n + 1 or len(self.gammas) != n or len(self.subgrads) < n:
            raise ValueError(
                f"inconsistent trace lengths: points={n + 1}, values={len(self.values)}, "
                f"subgrads={len(self.subgrads)}, gammas={len(self.gammas)}"
            )

    @property
    def n(self) -> int:
        return self.points.shape[0] - 1

    @property
    def x0(self) -> np.ndarray:
        return self.points[0]

    @property
    def last(self) -> np.ndarray:
        return self.points[-1]

    def gaps(self, f_star: float) -> np.ndarray:
        return self.values - f_star


def distance_to_optset(oracle: Oracle, x) -> float:
    x = as_vec(x)
    return float(np.linalg.norm(x - oracle.project(x)))


def pr_average(trace: IterateTrace, upto: int | None = None) -> np.ndarray:
    """Polyak-Ruppert average of ``x_0 .. x_upto``."""
    upto = trace.n if upto is None else upto
    if not 0 <= upto <= trace.n:
        raise IndexError(f"index {upto} outside trace of length {trace.n + 1}")
    return trace.points[: upto + 1].mean(axis=0)


# --- membership probes (used by tests and the harness) ---


def _sample(rng, dim, count, radius):
    return rng.uniform(-radius, radius, size=(count, dim))


def subgradient_violation(oracle: Oracle, rng=None, count=1000, radius=10.0, policy=FIRST_ACTIVE) -> float:
    """Most negative value of ``f(y) - f(x) - <g(x), y - x>`` on random pairs."""
    rng = np.random.default_rng(rng)
    xs = _sample(rng, oracle.dim, count, radius)
    ys = _sample(rng, oracle.dim, count, radius)
    worst = math.inf
    for x, y in zip(xs, ys):
        g = oracle.subgrad(x, policy)
        worst = min(worst, oracle.value(y) - oracle.value(x) - float(g @ (y - x)))
    return worst


def qgplus_violation(oracle: Oracle, L: float, rng=None, count=1000, radius=10.0) -> float:
    """Largest ``f(x) - f_star - (L/2) d(x, X*)^2`` on random points."""
    rng = np.random.default_rng(rng)
    worst = -math.inf
    for x in _sample(rng, oracle.dim, count, radius):
        d = distance_to_optset(oracle, x)
        worst = max(worst, oracle.gap(x) - 0.5 * L * d * d)
    return worst


def lipschitz_violation(oracle: Oracle, M: float, rng=None, count=1000, radius=10.0) -> float:
    rng = np.random.default_rng(rng)
    xs = _sample(rng, oracle.dim, count, radius)
    ys = _sample(rng, oracle.dim, count, radius)
    worst = -math.inf
    for x, y in zip(xs, ys):
        worst = max(worst, abs(oracle.value(x) - oracle.value(y)) - M * np.linalg.norm(x - y))
    return worst


Selector = Callable[[Oracle, np.ndarray, int], np.ndarray]
