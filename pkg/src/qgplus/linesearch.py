"""Exact line-search along a direction and orthogonal subgradient selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ACTIVE_TOL, Oracle, as_vec

EXPANSION_CAP = 1e12
LS_TOL = 1e-12
ORTH_TOL = 1e-6
_MAX_BISECT = 400


class LineSearchError(RuntimeError):
    pass


class UnboundedLineError(LineSearchError):
    """The restriction of f to the line keeps decreasing past the expansion cap."""


@dataclass
class LineProblem:
    base: np.ndarray
    direction: np.ndarray
    oracle: Oracle
    tolerance: float = 0.0

    def solve(self, pick: str = "first"):
        return exact_line_search(self.oracle, self.base, self.direction, tol=self.tolerance, pick=pick)


def directional_bracket(oracle: Oracle, x, d, tol: float = ACTIVE_TOL) -> tuple[float, float]:
    """Return ``(phi'_-, phi'_+)`` along ``d`` from the active subgradients at ``x``."""
    dd = oracle.active_subgradients(x, tol) @ d
    return float(dd.min()), float(dd.max())


def _sign(oracle, base, d, alpha):
    # exact ties only: the search then closes in on kinks to machine precision
    lo, hi = directional_bracket(oracle, base + alpha * d, d, tol=0.0)
    if lo > 0:
        return 1
    if hi < 0:
        return -1
    return 0


def _bisect(oracle, base, d, lo, hi, tol, stop_at_zero):
    # invariant: sign(lo) <= 0 < sign(hi) when stop_at_zero is False,
    #            sign(lo) < 0 < sign(hi) otherwise
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * (1.0 + abs(hi)) or not lo < mid < hi:
            break
        s = _sign(oracle, base, d, mid)
        if s == 0 and stop_at_zero:
            return mid, mid
        if s <= 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _minimize_forward(oracle, base, d, tol):
    # assumes phi'_+(0) < 0: the minimizers lie at alpha > 0
    lo, hi = 0.0, 1.0
    while True:
        s = _sign(oracle, base, d, hi)
        if s == 0:
            return hi
        if s > 0:
            break
        lo, hi = hi, 2.0 * hi
        if hi > EXPANSION_CAP:
            raise UnboundedLineError(f"{oracle.name}: no minimizer along direction before alpha={EXPANSION_CAP:g}")
    a, b = _bisect(oracle, base, d, lo, hi, tol, stop_at_zero=True)
    return 0.5 * (a + b)


def _farthest(oracle, base, d, alpha, tol):
    lo, step = alpha, max(1.0, abs(alpha))
    hi = lo + step
    while _sign(oracle, base, d, hi) <= 0:
        lo, step = hi, 2.0 * step
        hi = lo + step
        if hi > EXPANSION_CAP:
            raise UnboundedLineError(f"{oracle.name}: flat minimizing set is unbounded")
    a, _ = _bisect(oracle, base, d, lo, hi, tol, stop_at_zero=False)
    return a


def exact_line_search(oracle: Oracle, base, direction, tol: float = 0.0, pick: str = "first"):
    """Minimize ``alpha -> f(base + alpha * direction)`` over the real line.

    Brackets the sign change of the directional derivative by doubling, then
    bisects until ``0`` lies in ``[phi'_-(alpha), phi'_+(alpha)]`` or the
    bracket is narrower than ``tol * (1 + |alpha|)``. The default ``tol=0``
    bisects down to adjacent doubles, well inside :data:`LS_TOL`; this keeps
    the pieces meeting at a kink equal to rounding so their gradients are
    subgradients there to the same accuracy.

    ``pick="farthest"`` returns the minimizer farthest from ``base`` on the
    descent side when the minimizing set is an interval; lower-bound
    constructions use it to play the adversary.

    Returns ``(alpha, x)``.
    """
    base = as_vec(base)
    d = as_vec(direction)
    if not np.any(d):
        return 0.0, base.copy()
    if pick not in ("first", "farthest"):
        raise ValueError(f"unknown pick {pick!r}")

    s0 = _sign(oracle, base, d, 0.0)
    sgn = -1.0 if s0 > 0 else 1.0
    dd = sgn * d
    alpha = 0.0 if s0 == 0 else _minimize_forward(oracle, base, dd, tol)
    if pick == "farthest":
        alpha = _farthest(oracle, base, dd, alpha, tol)
    alpha *= sgn
    return alpha, base + alpha * d


def golden_line_search(oracle: Oracle, base, direction, tol: float = 1e-10):
    """Derivative-free fallback using only function values."""
    from scipy.optimize import minimize_scalar

    base = as_vec(base)
    d = as_vec(direction)
    if not np.any(d):
        return 0.0, base.copy()
    phi = lambda a: oracle.value(base + a * d)
    # bracket by doubling on each side
    lo, hi = -1.0, 1.0
    while phi(hi) < phi(0.5 * hi) and hi < EXPANSION_CAP:
        hi *= 2.0
    while phi(lo) < phi(0.5 * lo) and -lo < EXPANSION_CAP:
        lo *= 2.0
    if hi >= EXPANSION_CAP or -lo >= EXPANSION_CAP:
        raise UnboundedLineError("golden-section bracket diverged")
    res = minimize_scalar(phi, bounds=(lo, hi), method="bounded", options={"xatol": tol})
    return float(res.x), base + res.x * d


def orthogonal_subgradient(oracle: Oracle, x, v, tol: float = ORTH_TOL) -> np.ndarray:
    """Subgradient ``g`` at ``x`` with ``<g, v> = 0``.

    ``x`` must minimize ``f`` along ``v`` so that the active subgradients
    bracket zero. With a single active piece the gradient is returned as is;
    otherwise the two extreme active pieces ``a``, ``b`` are mixed with
    ``theta = <g_b, v> / (<g_b, v> - <g_a, v>)``.
    """
    G = oracle.active_subgradients(x)
    if v is None or not np.any(v):
        return G[0].copy()
    v = as_vec(v)
    dd = G @ v
    scale = tol * float(np.max(np.linalg.norm(G, axis=1))) * float(np.linalg.norm(v))
    a, b = int(np.argmin(dd)), int(np.argmax(dd))
    if dd[a] > scale or dd[b] < -scale:
        raise LineSearchError(
            f"{oracle.name}: no subgradient orthogonal to the search direction "
            f"(directional derivatives in [{dd[a]:.3e}, {dd[b]:.3e}])"
        )
    if len(G) == 1 or dd[b] - dd[a] <= 0.0:
        return G[a].copy()
    if dd[a] >= 0.0:
        return G[a].copy()
    if dd[b] <= 0.0:
        return G[b].copy()
    theta = dd[b] / (dd[b] - dd[a])
    return theta * G[a] + (1.0 - theta) * G[b]
