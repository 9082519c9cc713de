"""Interpolation conditions for convex QG+(L) data, extensions and random instances.

A dataset is a finite family of triplets ``(x_i, g_i, f_i)`` together with
the class parameter ``L``. Points with ``g_i = 0`` form the index set of
optimal points. The dataset is interpolable by a convex QG+(L) function iff

* ``f_i >= f_j + <g_j, x_i - x_j>`` for all ``i, j``, and
* ``f_i >= f_j + <g_j, x_i - x_j> + |g_j|^2 / (2L)`` for optimal ``i`` and all ``j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ACTIVE_TOL, FEAS_TOL, Oracle, QGPlus, as_vec

HULL_TOL = 1e-13


class InterpolationError(ValueError):
    pass


@dataclass
class InterpDataset:
    xs: np.ndarray
    gs: np.ndarray
    fs: np.ndarray
    L: float

    def __post_init__(self):
        self.xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        self.gs = np.atleast_2d(np.asarray(self.gs, dtype=float))
        self.fs = np.atleast_1d(np.asarray(self.fs, dtype=float))
        if not (self.xs.shape == self.gs.shape and len(self.fs) == len(self.xs)):
            raise ValueError("x, g and f must describe the same number of points")
        if not self.L > 0:
            raise ValueError("L must be positive")
        for a in (self.xs, self.gs, self.fs):
            if not np.all(np.isfinite(a)):
                raise ValueError("dataset contains non-finite entries")

    def __len__(self):
        return len(self.fs)

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    @property
    def optimal(self) -> np.ndarray:
        return np.flatnonzero(~np.any(self.gs != 0.0, axis=1))

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "points": [
                {"x": x.tolist(), "g": g.tolist(), "f": float(f)} for x, g, f in zip(self.xs, self.gs, self.fs)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "InterpDataset":
        try:
            pts = doc["points"]
            return cls([p["x"] for p in pts], [p["g"] for p in pts], [p["f"] for p in pts], float(doc["L"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed dataset document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def load(cls, path) -> "InterpDataset":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


@dataclass
class InterpReport:
    valid: bool
    violations: list = field(default_factory=list)

    def to_dict(self):
        return {
            "valid": self.valid,
            "violations": [{"i": i, "j": j, "slack": s, "kind": k} for i, j, s, k in self.violations],
        }


def interpolation_slacks(ds: InterpDataset) -> tuple[np.ndarray, np.ndarray]:
    """Slack matrices for the two inequality families.

    ``conv[i, j] = f_i - f_j - <g_j, x_i - x_j>`` for all pairs and
    ``qg[a, j]`` the same minus ``|g_j|^2 / (2L)`` for the a-th optimal point.
    """
    X, G, F = ds.xs, ds.gs, ds.fs
    inner = X @ G.T - np.sum(G * X, axis=1)[None, :]  # <g_j, x_i - x_j>
    conv = F[:, None] - F[None, :] - inner
    opt = ds.optimal
    qg = conv[opt] - np.sum(G * G, axis=1)[None, :] / (2.0 * ds.L)
    return conv, qg


def check_qgplus_interpolation(ds: InterpDataset, tol: float = FEAS_TOL) -> InterpReport:
    if len(ds) == 0:
        raise InterpolationError("empty dataset")
    opt = ds.optimal
    if opt.size == 0:
        raise InterpolationError("no point with zero subgradient; the conditions need at least one")
    conv, qg = interpolation_slacks(ds)
    violations = []
    for i, j in zip(*np.nonzero(conv < -tol)):
        violations.append((int(i), int(j), float(conv[i, j]), "convexity"))
    for a, j in zip(*np.nonzero(qg < -tol)):
        violations.append((int(opt[a]), int(j), float(qg[a, j]), "qg"))
    return InterpReport(not violations, violations)


def project_convex_hull(point, vertices, tol: float = HULL_TOL, max_iter: int = 1000):
    """Euclidean projection of ``point`` onto the convex hull of ``vertices``.

    Wolfe's minimum-norm-point method on the translated vertices, an active
    set over vertex subsets. Returns ``(projection, distance)``.
    """
    point = as_vec(point)
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    if V.shape[0] == 0:
        raise ValueError("need at least one vertex")
    P = V - point
    if len(P) == 1:
        return V[0].copy(), float(np.linalg.norm(P[0]))
    if len(P) == 2:
        e = V[1] - V[0]
        ee = float(e @ e)
        t = 0.0 if ee == 0.0 else min(1.0, max(0.0, float(-(P[0] @ e)) / ee))
        proj = V[0] + t * e
        return proj, float(np.linalg.norm(point - proj))

    scale = max(1.0, float(np.max(np.sum(P * P, axis=1))))
    S = [int(np.argmin(np.sum(P * P, axis=1)))]
    w = np.array([1.0])
    y = P[S[0]].copy()
    for _ in range(max_iter):
        dots = P @ y
        j = int(np.argmin(dots))
        if y @ y - dots[j] <= tol * scale or j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        while True:
            alpha = _affine_min_weights(P[S])
            if np.all(alpha > 1e-15):
                w = alpha
                break
            neg = alpha <= 1e-15
            denom = w[neg] - alpha[neg]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(denom > 0, w[neg] / denom, np.inf)
            theta = float(np.clip(np.min(ratios), 0.0, 1.0))
            w = (1.0 - theta) * w + theta * alpha
            keep = w > 1e-15
            keep[np.argmax(w)] = True
            S = [s for s, k in zip(S, keep) if k]
            w = w[keep] / w[keep].sum()
        y = w @ P[S]
    proj = point + y
    return proj, float(np.linalg.norm(y))


def _affine_min_weights(Q):
    # min |sum_i a_i q_i|^2 s.t. sum_i a_i = 1
    k = len(Q)
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = Q @ Q.T
    K[:k, k] = K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    a = sol[:k]
    return a / a.sum()


def hull_certificate(point, proj, vertices) -> float:
    """Largest ``<point - proj, v - proj>`` over the vertices (<= 0 at the projection)."""
    point, proj = as_vec(point), as_vec(proj)
    return float(np.max((np.atleast_2d(vertices) - proj) @ (point - proj)))


class ExtensionOracle(Oracle):
    """``max(max_j f_j + <g_j, x - x_j>, f* + (mu/2) d(x, H)^2)`` where ``H`` is the
    hull of the optimal points; the quadratic term is dropped when ``mu = 0``."""

    name = "extension"

    def __init__(self, ds: InterpDataset, mu: float):
        super().__init__(ds.dim, float(ds.fs[ds.optimal[0]]), (QGPlus(ds.L),))
        self.dataset = ds
        self.mu = float(mu)
        self.hull_vertices = ds.xs[ds.optimal]
        self._offsets = ds.fs - np.sum(ds.gs * ds.xs, axis=1)

    def _pieces(self, x):
        x = as_vec(x)
        vals = self.dataset.gs @ x + self._offsets
        p = None
        if self.mu > 0:
            p, dist = project_convex_hull(x, self.hull_vertices)
            vals = np.append(vals, self.f_star + 0.5 * self.mu * dist * dist)
        return x, vals, p

    def value(self, x):
        return float(np.max(self._pieces(x)[1]))

    def active_subgradients(self, x, tol=ACTIVE_TOL):
        x, vals, p = self._pieces(x)
        top = vals.max()
        idx = np.flatnonzero(vals >= top - tol * (1.0 + abs(top)))
        m = len(self.dataset)
        return np.array([self.dataset.gs[i] if i < m else self.mu * (x - p) for i in idx])

    def project(self, x):
        x = as_vec(x)
        if self.mu == 0.0:
            return x.copy()
        return project_convex_hull(x, self.hull_vertices)[0]


def extension_mu(ds: InterpDataset) -> float:
    opt = ds.optimal
    f_star = ds.fs[opt[0]]
    hull = ds.xs[opt]
    ratios = []
    for i in range(len(ds)):
        if i in opt:
            continue
        _, dist = project_convex_hull(ds.xs[i], hull)
        if dist > 0:
            ratios.append((ds.fs[i] - f_star) / dist**2)
    return 2.0 * min(ratios) if ratios else 0.0


def build_extension(ds: InterpDataset) -> ExtensionOracle:
    report = check_qgplus_interpolation(ds)
    if not report.valid:
        raise InterpolationError(f"dataset violates {len(report.violations)} interpolation inequalities")
    return ExtensionOracle(ds, extension_mu(ds))


def _generator_pieces(rng, d, vertices, L):
    """Affine pieces ``<b, x> + c`` lying below ``(L/2) d(x, hull)^2``."""
    k = int(rng.integers(1, 5))
    B = rng.normal(size=(k, d)) * rng.uniform(0.2, 1.5, size=(k, 1)) * L
    c = np.empty(k)
    for a in range(k):
        top = float(np.max(vertices @ B[a]))
        c[a] = -top - (B[a] @ B[a]) / (2.0 * L) - rng.uniform(0.0, 0.1 * L)
    return B, c


def random_valid_instance(seed, d: int = 2, num_points: int = 4, L: float = 1.0):
    """Random valid dataset and its extension oracle.

    Samples a convex QG+(L) function
    ``F = max(affine pieces, (mu0/2) d(x, H)^2)`` whose affine pieces satisfy
    the optimal-point inequality against the hull ``H`` of 1-3 random optimal
    points with uniform slack in ``[0, 0.1 L]``, then reads values and exact
    subgradients of ``F`` at random points. Valid by construction.
    """
    if d < 1 or num_points < 1:
        raise ValueError("need d >= 1 and num_points >= 1")
    rng = np.random.default_rng(seed)
    if num_points == 1:
        ds = InterpDataset(rng.uniform(-1, 1, size=(1, d)), np.zeros((1, d)), [0.0], L)
        return ds, build_extension(ds)

    n_opt = int(rng.integers(1, min(3, num_points - 1) + 1))
    vertices = rng.uniform(-1.0, 1.0, size=(n_opt, d))
    mu0 = L * rng.uniform(0.2, 1.0)
    B, c = _generator_pieces(rng, d, vertices, L)

    xs = [v for v in vertices]
    gs = [np.zeros(d) for _ in vertices]
    fs = [0.0] * n_opt
    for x in rng.uniform(-2.5, 2.5, size=(num_points - n_opt, d)):
        p, dist = project_convex_hull(x, vertices)
        vals = np.append(B @ x + c, 0.5 * mu0 * dist * dist)
        a = int(np.argmax(vals))
        xs.append(x)
        gs.append(B[a].copy() if a < len(c) else mu0 * (x - p))
        fs.append(float(vals[a]))
    ds = InterpDataset(np.array(xs), np.array(gs), np.array(fs), L)
    return ds, build_extension(ds)


def random_start(seed, d: int, radius: float = 3.0) -> np.ndarray:
    return np.random.default_rng([int(seed), 7919]).uniform(-radius, radius, size=d)
