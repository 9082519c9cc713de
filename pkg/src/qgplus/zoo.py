"""Certified problem instances and adversarial oracles.

Every oracle here ships its class tags, its optimal value and, where the
optimal set is known in closed form, a projection onto it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    ACTIVE_TOL,
    ADVERSARIAL,
    FIRST_ACTIVE,
    LOWEST_INDEX,
    POLICIES,
    Lipschitz,
    MaxOracle,
    NoProjectionError,
    Oracle,
    OracleError,
    QGPlus,
    RGPlus,
    SmoothOracle,
    as_vec,
)
from .schedules import GrowthFn

SQRT3 = math.sqrt(3.0)


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be positive, got {v}")


def huber_value(z, L, delta):
    z = abs(z)
    if z <= delta:
        return 0.5 * L * z * z
    return L * delta * z - 0.5 * L * delta * delta


def huber_deriv(z, L, delta):
    if abs(z) <= delta:
        return L * z
    return L * delta * math.copysign(1.0, z)


def huber_oracle(L: float = 1.0, delta: float = 1.0, dim: int = 1) -> SmoothOracle:
    """``x -> h(||x||)`` with ``h(z) = L z^2 / 2`` for ``|z| <= delta`` and
    ``L delta |z| - L delta^2 / 2`` beyond."""
    _positive(L=L, delta=delta)

    def fun(x):
        return huber_value(np.linalg.norm(x), L, delta)

    def grad(x):
        r = np.linalg.norm(x)
        if r <= delta:
            return L * x
        return (L * delta / r) * x

    return SmoothOracle(
        fun, grad, dim, 0.0, (QGPlus(L), Lipschitz(L * delta)),
        projector=lambda x: np.zeros_like(x), name="huber",
    )


def huber_lower_bound_start(L: float, gammas: Sequence[float]) -> float:
    """Starting point ``1 + 2 sum_k L gamma_k`` used with the unit Huber function."""
    return 1.0 + 2.0 * L * float(np.sum(gammas))


class SupNormOracle(Oracle):
    """``scale * ||x - shift||_inf ** power`` for ``power`` in {1, 2}.

    ``power=2, scale=L/2`` is the squared sup-norm, ``power=1, scale=M`` the
    plain sup-norm (``M |z|`` in one dimension).

    ``tie_policy`` picks among tied argmax coordinates: ``lowest-index``, or
    ``adversarial``, which returns the lowest coordinate never returned before
    in the current run. The adversarial variant is stateful; call
    :meth:`reset` between runs.
    """

    def __init__(self, scale, dim, power=2, shift=None, tie_policy=LOWEST_INDEX, tags=(), name=None):
        super().__init__(dim, 0.0, tags)
        _positive(scale=scale)
        if power not in (1, 2):
            raise ValueError("power must be 1 or 2")
        if tie_policy not in (LOWEST_INDEX, FIRST_ACTIVE, ADVERSARIAL):
            raise ValueError(f"unknown tie policy {tie_policy!r}")
        self.scale = float(scale)
        self.power = power
        self.shift = np.zeros(dim) if shift is None else as_vec(shift)
        self.tie_policy = tie_policy
        self.name = name or ("supnormsq" if power == 2 else "supnorm")
        self._seen: set[int] = set()

    def reset(self):
        self._seen.clear()

    def value(self, x):
        m = float(np.max(np.abs(as_vec(x) - self.shift)))
        return self.scale * m**self.power

    def _argmax(self, r, tol=ACTIVE_TOL):
        m = np.max(np.abs(r))
        return m, np.flatnonzero(np.abs(r) >= m - tol * (1.0 + m))

    def _generator(self, r, m, i):
        g = np.zeros(self.dim)
        coef = self.scale * (2.0 * m if self.power == 2 else 1.0)
        g[i] = coef * math.copysign(1.0, r[i])
        return g

    def active_subgradients(self, x, tol=ACTIVE_TOL):
        r = as_vec(x) - self.shift
        m, idx = self._argmax(r, tol)
        if m == 0.0:
            if self.power == 2:
                return np.zeros((1, self.dim))
            eye = self.scale * np.eye(self.dim)
            return np.vstack([np.zeros(self.dim), eye, -eye])
        return np.array([self._generator(r, m, i) for i in idx])

    def subgrad(self, x, policy=FIRST_ACTIVE, v=None):
        if policy not in POLICIES:
            raise ValueError(f"unknown selection policy {policy!r}")
        if policy == ADVERSARIAL or (policy == FIRST_ACTIVE and self.tie_policy == ADVERSARIAL):
            r = as_vec(x) - self.shift
            m, idx = self._argmax(r)
            if m == 0.0:
                return np.zeros(self.dim)
            fresh = [i for i in idx if i not in self._seen]
            i = fresh[0] if fresh else idx[0]
            self._seen.add(int(i))
            return self._generator(r, m, i)
        return super().subgrad(x, policy, v)

    def project(self, x):
        return self.shift.copy()


def supnormsq_oracle(L: float = 1.0, d: int = 2, tie_policy: str = LOWEST_INDEX, shift=None) -> SupNormOracle:
    """``(L/2) ||x - shift||_inf^2``: QG+(L), minimized only at ``shift``."""
    _positive(L=L)
    return SupNormOracle(0.5 * L, d, 2, shift, tie_policy, tags=(QGPlus(L),))


def supnorm_oracle(M: float = 1.0, d: int = 1, tie_policy: str = LOWEST_INDEX) -> SupNormOracle:
    """``M ||x||_inf``: M-Lipschitz in the Euclidean norm (``M|z|`` when d=1)."""
    _positive(M=M)
    name = "abs" if d == 1 else "supnorm"
    return SupNormOracle(M, d, 1, None, tie_policy, tags=(Lipschitz(M), RGPlus(GrowthFn.sqrt(M))), name=name)


def mixed_oracle(M: float = 1.0, L: float = 1.0, dim: int = 1, delta: float = math.inf) -> Oracle:
    """``M ||x|| + huber_{L, delta}(||x||)``; with the default ``delta`` the
    second term is ``L ||x||^2 / 2`` and the growth bound is attained."""
    _positive(M=M, L=L, delta=delta)

    class _Mixed(Oracle):
        name = "mixed" if math.isinf(delta) else "huber-abs"

        def value(self, x):
            r = float(np.linalg.norm(as_vec(x)))
            return M * r + huber_value(r, L, delta)

        def active_subgradients(self, x, tol=ACTIVE_TOL):
            x = as_vec(x)
            r = float(np.linalg.norm(x))
            if r == 0.0:
                rows = [np.zeros(dim)]
                if dim == 1:
                    rows += [np.array([-M]), np.array([M])]
                return np.array(rows)
            return ((M + huber_deriv(r, L, delta)) / r * x)[None, :]

        def project(self, x):
            return np.zeros(dim)

    tags = (RGPlus(GrowthFn.mixed(M, L)),)
    if math.isfinite(delta):
        tags += (Lipschitz(M + L * delta),)
    return _Mixed(dim, 0.0, tags)


def quadratic_diag_oracle(mu: float = 1.0, L: float = 1.0, d: int = 2) -> SmoothOracle:
    """``(1/2) sum_i a_i x_i^2`` with ``a`` log-spaced from ``mu`` to ``L``.

    Satisfies ``f - f* >= (mu/2) ||x||^2``, i.e. the lower growth condition
    with linear ``h`` and ``kappa = L / mu``.
    """
    _positive(mu=mu, L=L)
    if mu > L:
        raise ValueError("need mu <= L")
    if d == 1 and mu != L:
        raise ValueError("one-dimensional quad-diag needs mu == L")
    a = np.geomspace(mu, L, d)
    a[0], a[-1] = mu, L
    oracle = SmoothOracle(
        lambda x: 0.5 * float(a @ (x * x)), lambda x: a * x, d, 0.0, (QGPlus(L),),
        projector=lambda x: np.zeros_like(x), name="quad-diag",
    )
    oracle.coefficients = a
    oracle.kappa = L / mu
    return oracle


@dataclass
class LB3DInstance:
    """Three-dimensional construction on which the subgradient method's last
    iterate stays at ``(L/2) L gamma_{n-1}`` relative gap as ``eta -> 0``."""

    L: float
    n: int
    gammas: np.ndarray
    eta: float
    delta: float
    xi: np.ndarray
    lam: float
    oracle: MaxOracle
    x0: np.ndarray
    predicted_gap: float

    def __iter__(self):
        return iter((self.oracle, self.x0, self.predicted_gap))

    def expected_iterate(self, i: int) -> np.ndarray:
        """``(1, eta, xi_i)`` for ``i <= n-1``."""
        return np.array([1.0, self.eta, self.xi[i]])


def lb3d_instance(L: float = 1.0, n: int = 5, gammas=None, eta: float = 1e-4) -> LB3DInstance:
    if n < 2:
        raise ValueError("construction needs n >= 2")
    gammas = np.full(n, 1.0 / L) if gammas is None else as_vec(gammas)
    if len(gammas) != n:
        raise ValueError(f"need {n} step-sizes, got {len(gammas)}")
    _positive(L=L, eta=eta, gamma_min=float(gammas.min()))

    delta = math.sqrt(eta * SQRT3 / (1.0 + L * gammas[n - 2]))
    xi = np.array([delta * (1.0 + L * gammas[i : n - 1].sum()) for i in range(n)])
    lam = L * eta / ((1.0 + L * gammas[n - 2]) * (1.0 + eta**2 + xi[0] ** 2))
    half = 0.5 * L

    pieces = [
        (lambda x: half * (x[0] - 1.0 + SQRT3 * x[1]), lambda x: np.array([half, half * SQRT3, 0.0])),
        (lambda x: half * (x[0] - 1.0 - SQRT3 * x[1]), lambda x: np.array([half, -half * SQRT3, 0.0])),
        (lambda x: huber_value(x[2], L, delta), lambda x: np.array([0.0, 0.0, huber_deriv(x[2], L, delta)])),
        (lambda x: 0.5 * lam * float(x @ x), lambda x: lam * x),
    ]
    oracle = MaxOracle(pieces, 3, 0.0, (QGPlus(L),), projector=lambda x: np.zeros(3), name="lb3d")
    x0 = np.array([1.0, eta, xi[0]])
    predicted = half * (L * gammas[n - 1] - eta * SQRT3)
    return LB3DInstance(L, n, gammas, eta, delta, xi, lam, oracle, x0, predicted)


# --- resisting oracles ---


class GameOver(OracleError):
    pass


class ResistingOracle(Oracle):
    """Adversarial oracle for the first-order lower bound on ``R^{n+1}``.

    ``mode="vertex"`` plays the sign-vertex game: the hidden minimizer is a
    ``+-1`` vector; each answer commits to the farthest surviving candidate,
    reveals one coordinate, and the surviving set is stored as the dict of
    fixed coordinates. After ``n`` queries the next new point commits the
    game to the surviving vertex farthest from it.

    ``mode="span"`` answers with the squared sup-norm centred at 0 and the
    adversarial tie rule (lowest never-returned coordinate); the associated
    start point is the all-ones vector.
    """

    def __init__(self, L: float = 1.0, n: int = 1, mode: str = "vertex"):
        if n < 0:
            raise ValueError("horizon must be nonnegative")
        if mode not in ("vertex", "span"):
            raise ValueError(f"unknown mode {mode!r}")
        super().__init__(n + 1, 0.0, (QGPlus(L),))
        self.n, self.mode = int(n), mode
        self.name = f"resisting-{mode}"
        self._span = supnormsq_oracle(L, n + 1, ADVERSARIAL)
        self.reset()

    def reset(self):
        self.fixed: dict[int, float] = {}
        self.history: list[tuple[np.ndarray, float, np.ndarray]] = []
        self.vstar: np.ndarray | None = None
        self._cache: dict[bytes, tuple[float, np.ndarray]] = {}
        self._span.reset()

    @property
    def start(self) -> np.ndarray:
        return np.ones(self.dim) if self.mode == "span" else np.zeros(self.dim)

    @property
    def num_queries(self) -> int:
        return len(self.history)

    def candidate_count(self) -> int:
        return 2 ** (self.dim - len(self.fixed))

    def candidates(self) -> np.ndarray:
        free = [i for i in range(self.dim) if i not in self.fixed]
        out = []
        for signs in itertools.product((1.0, -1.0), repeat=len(free)):
            v = np.empty(self.dim)
            for i, s in self.fixed.items():
                v[i] = s
            v[free] = signs
            out.append(v)
        return np.array(out)

    def _farthest(self, x):
        v = np.empty(self.dim)
        for i in range(self.dim):
            v[i] = self.fixed[i] if i in self.fixed else (-1.0 if x[i] > 0 else 1.0)
        return v

    def _answer_for(self, x, v):
        r = x - v
        m = float(np.max(np.abs(r)))
        value = 0.5 * self.L * m * m
        g = np.zeros(self.dim)
        if m > 0:
            i = int(np.flatnonzero(np.abs(r) == m)[0])
            g[i] = self.L * m * math.copysign(1.0, r[i])
        return value, g

    def query(self, x):
        """Answer one query; returns ``(value, subgradient)``."""
        x = as_vec(x)
        if self.mode == "span":
            ans = (self._span.value(x), self._span.subgrad(x))
            self.history.append((x, *ans))
            return ans
        if self.vstar is not None or self.num_queries >= self.n:
            raise GameOver(f"horizon of {self.n} queries exhausted")
        v = self._farthest(x)
        value, g = self._answer_for(x, v)
        if np.any(g):
            i = int(np.flatnonzero(g)[0])
            self.fixed.setdefault(i, float(v[i]))
        self.history.append((x, value, g))
        return value, g

    def commit(self, x) -> np.ndarray:
        """Freeze the hidden minimizer as the surviving vertex farthest from ``x``."""
        if self.mode == "span":
            self.vstar = np.zeros(self.dim)
        elif self.vstar is None:
            self.vstar = self._farthest(as_vec(x))
        return self.vstar.copy()

    def _lookup(self, x):
        x = as_vec(x)
        key = x.tobytes()
        if key not in self._cache:
            if self.mode == "vertex" and self.vstar is None and self.num_queries >= self.n:
                self.commit(x)
            if self.mode == "vertex" and self.vstar is not None:
                self._cache[key] = self._answer_for(x, self.vstar)
            else:
                self._cache[key] = self.query(x)
        return self._cache[key]

    def value(self, x):
        return self._lookup(x)[0]

    def active_subgradients(self, x, tol=ACTIVE_TOL):
        return self._lookup(x)[1][None, :].copy()

    def project(self, x):
        if self.mode == "span":
            return np.zeros(self.dim)
        if self.vstar is None:
            raise NoProjectionError("minimizer not committed yet")
        return self.vstar.copy()

    def consistent_with(self, v, tol: float = 1e-12) -> bool:
        """Whether every answer so far is what ``f_v`` could have returned."""
        for x, value, g in self.history:
            val_v, _ = self._answer_for(x, v)
            if abs(val_v - value) > tol * (1.0 + abs(value)):
                return False
            r = x - v
            m = np.max(np.abs(r))
            i = np.flatnonzero(g)
            if m == 0:
                if i.size:
                    return False
                continue
            if i.size != 1 or abs(abs(r[i[0]]) - m) > tol * (1 + m):
                return False
            if abs(g[i[0]] - self.L * m * math.copysign(1.0, r[i[0]])) > tol * (1 + self.L * m):
                return False
        return True


def resisting_oracle_query(oracle: ResistingOracle, x):
    return oracle.query(x)


# --- cycling counterexamples ---


class CoordinateScript:
    """Selection rule that returns the active generator supported on
    ``coords[k % len(coords)]`` at iteration ``k`` (first active otherwise)."""

    def __init__(self, coords: Sequence[int]):
        self.coords = tuple(coords)

    def __call__(self, oracle: Oracle, x, k: int) -> np.ndarray:
        G = oracle.active_subgradients(x)
        want = self.coords[k % len(self.coords)]
        for g in G:
            nz = np.flatnonzero(g)
            if nz.size == 1 and nz[0] == want:
                return g.copy()
        return G[0].copy()


@dataclass
class CyclingInstance:
    name: str
    oracle: Oracle
    x0: np.ndarray
    expected_cycle: np.ndarray
    algorithm: str
    gamma: float | None = None
    selector: Callable | None = None
    ls_pick: str = "first"
    params: dict = field(default_factory=dict)


def cycle_abs(M: float = 1.0, gamma: float = 1.0) -> CyclingInstance:
    """``M|z|`` under constant step ``gamma`` from ``3/4 M gamma``: a 2-cycle."""
    _positive(M=M, gamma=gamma)
    x0 = np.array([0.75 * M * gamma])
    cycle = np.array([[0.75 * M * gamma], [-0.25 * M * gamma]])
    return CyclingInstance("cycle-abs", supnorm_oracle(M, 1), x0, cycle, "subgrad", gamma=gamma, params={"M": M})


def cycle_linf(kind: str = "sq", L: float = 1.0, M: float = 1.0) -> CyclingInstance:
    """Exact line-search subgradient method stuck on four sign points of R^3.

    Starting at ``(1,1,1)`` the subgradient alternates between coordinates 1
    and 0 and the line-search takes the far end of its flat minimizing set.
    """
    if kind == "sq":
        oracle, params = supnormsq_oracle(L, 3), {"L": L}
    elif kind == "lin":
        oracle, params = supnorm_oracle(M, 3), {"M": M}
    else:
        raise ValueError("kind must be 'sq' or 'lin'")
    cycle = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]])
    return CyclingInstance(
        f"cycle-linf-{kind}", oracle, cycle[0].copy(), cycle, "subgrad-els",
        selector=CoordinateScript((1, 0)), ls_pick="farthest", params=params,
    )


def cycling_instances(M: float = 1.0, gamma: float = 1.0, L: float = 1.0) -> list[CyclingInstance]:
    return [cycle_abs(M, gamma), cycle_linf("sq", L=L), cycle_linf("lin", M=M)]
