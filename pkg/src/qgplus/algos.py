"""Deterministic runners for the subgradient and heavy-ball families.

Every runner takes an oracle and a :class:`RunConfig` and returns an
:class:`~qgplus.core.IterateTrace` holding ``x_0 .. x_n``, their values, the
subgradients ``g_0 .. g_n`` (the last one is queried at ``x_n`` so that
certificates needing ``g_n`` can be evaluated) and the step-sizes used.

Heavy-ball steps are indexed from ``k = 1``; step ``k`` produces ``x_k`` and
uses ``gamma_{k-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import FEAS_TOL, FIRST_ACTIVE, IterateTrace, Oracle, as_vec
from .linesearch import exact_line_search, orthogonal_subgradient
from .schedules import GrowthFn, StepSchedule


class RunError(ValueError):
    """A runner was given inconsistent inputs."""


@dataclass
class RunConfig:
    x0: np.ndarray
    n: int
    schedule: StepSchedule | None = None
    L: float | None = None
    growth: GrowthFn | None = None
    kappa: float | None = None
    f_star: float | None = None
    policy: str = FIRST_ACTIVE
    selector: Callable | None = None
    ls_pick: str = "first"
    ls_tol: float = 0.0
    form: str = "momentum"
    label: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x0 = as_vec(self.x0)
        if int(self.n) != self.n or self.n < 1:
            raise RunError("n must be a positive integer")
        self.n = int(self.n)
        if self.kappa is not None and not self.kappa >= 1:
            raise RunError("kappa must be >= 1")
        if self.form not in ("averaged", "momentum"):
            raise RunError(f"unknown heavy-ball form {self.form!r}")


def _pick(oracle: Oracle, cfg: RunConfig, x, k, v=None):
    if cfg.selector is not None:
        return as_vec(cfg.selector(oracle, x, k))
    return oracle.subgrad(x, cfg.policy, v)


def _start(oracle: Oracle, cfg: RunConfig):
    if len(cfg.x0) != oracle.dim:
        raise RunError(f"x0 has dimension {len(cfg.x0)}, oracle expects {oracle.dim}")
    oracle.reset()
    return cfg.x0.copy()


def _finish(oracle, cfg, points, gs, gammas, name, **meta):
    points = np.array(points)
    values = np.array([oracle.value(x) for x in points])
    if len(gs) < len(points):
        gs.append(_pick(oracle, cfg, points[-1], len(points) - 1))
    meta = {"algorithm": name, "oracle": getattr(oracle, "name", "oracle"), **cfg.label, **meta}
    return IterateTrace(points, values, np.array(gs), np.array(gammas), meta)


def _require_L(oracle, cfg):
    L = cfg.L if cfg.L is not None else oracle.L
    if L is None or not L > 0:
        raise RunError("this method needs the class parameter L (config or QGPlus tag)")
    return float(L)


def _gap(oracle, x, f_star):
    gap = oracle.value(x) - f_star
    if gap < -FEAS_TOL * (1.0 + abs(f_star)):
        raise RunError(f"f(x) = {oracle.value(x):.17g} is below the supplied f* = {f_star:.17g}")
    return max(gap, 0.0)


def subgradient_run(oracle: Oracle, cfg: RunConfig) -> IterateTrace:
    """``x_k = x_{k-1} - gamma_{k-1} g_{k-1}``; with ``decreasing-u`` steps this is
    the equalizing decreasing-step method."""
    if cfg.schedule is None:
        raise RunError("subgradient method needs a step-size schedule")
    x = _start(oracle, cfg)
    points, gs, gammas = [x], [], []
    for t in range(cfg.n):
        g = _pick(oracle, cfg, x, t)
        gamma = cfg.schedule(t)
        x = x - gamma * g
        points.append(x)
        gs.append(g)
        gammas.append(gamma)
    return _finish(oracle, cfg, points, gs, gammas, "subgrad", schedule=cfg.schedule.kind)


def subgradient_ls_run(oracle: Oracle, cfg: RunConfig) -> IterateTrace:
    """Subgradient direction with an exact line-search for the step length."""
    x = _start(oracle, cfg)
    points, gs, gammas = [x], [], []
    for t in range(cfg.n):
        g = _pick(oracle, cfg, x, t)
        alpha, x = exact_line_search(oracle, x, -g, tol=cfg.ls_tol, pick=cfg.ls_pick)
        points.append(x)
        gs.append(g)
        gammas.append(alpha)
    return _finish(oracle, cfg, points, gs, gammas, "subgrad-els", ls_pick=cfg.ls_pick)


def heavyball_run(oracle: Oracle, cfg: RunConfig, form: str | None = None) -> IterateTrace:
    """Heavy-ball with ``gamma_{k-1} = 1/(L(k+1))`` and momentum ``(k-1)/(k+1)``.

    ``form="averaged"`` uses
    ``x_k = k/(k+1) x_{k-1} + x_0/(k+1) - (1/(k+1)) sum_{i<k} g_i / L``;
    ``form="momentum"`` the equivalent two-term recursion.
    """
    form = form or cfg.form
    if form not in ("averaged", "momentum"):
        raise RunError(f"unknown heavy-ball form {form!r}")
    L = _require_L(oracle, cfg)
    x0 = _start(oracle, cfg)
    points, gs, gammas = [x0], [], []
    gsum = np.zeros_like(x0)
    prev = x0
    x = x0
    for k in range(1, cfg.n + 1):
        g = _pick(oracle, cfg, x, k - 1)
        gs.append(g)
        gamma = 1.0 / (L * (k + 1))
        if form == "averaged":
            gsum = gsum + g
            x_new = (k / (k + 1)) * x + x0 / (k + 1) - gsum / (L * (k + 1))
        else:
            x_new = x - gamma * g + ((k - 1) / (k + 1)) * (x - prev)
        prev, x = x, x_new
        points.append(x)
        gammas.append(gamma)
    return _finish(oracle, cfg, points, gs, gammas, "hb", form=form, L=L)


def heavyball_ls_run(oracle: Oracle, cfg: RunConfig) -> IterateTrace:
    """Parameter-free heavy-ball: the step along the accumulated subgradients
    ``v_k`` is found by exact line-search from
    ``y_k = k/(k+1) x_{k-1} + x_0/(k+1)``, and each new subgradient is chosen
    orthogonal to the direction that produced its point.

    ``gammas[k-1]`` stores ``-alpha_k``, the step taken along ``-v_k``.
    """
    x0 = _start(oracle, cfg)
    x = x0
    v = np.zeros_like(x0)
    g = _pick(oracle, cfg, x, 0)
    points, gs, gammas = [x0], [g], []
    for k in range(1, cfg.n + 1):
        v = v + g
        y = (k / (k + 1)) * x + x0 / (k + 1)
        alpha, x = exact_line_search(oracle, y, v, tol=cfg.ls_tol, pick=cfg.ls_pick)
        g = orthogonal_subgradient(oracle, x, v) if cfg.selector is None else _pick(oracle, cfg, x, k, v)
        points.append(x)
        gs.append(g)
        gammas.append(-alpha)
    return _finish(oracle, cfg, points, gs, gammas, "hb-ls")


def _rg_gamma(h: GrowthFn, gap: float, l: int) -> float:
    return h.inv_deriv_at_level(gap) / (2.0 * (l + 1))


def _momentum_rg(oracle, cfg, name, counter):
    if cfg.growth is None:
        raise RunError(f"{name} needs a growth function")
    if cfg.f_star is None:
        raise RunError(f"{name} needs f* as an input; it is never estimated")
    h, f_star = cfg.growth, float(cfg.f_star)
    x = _start(oracle, cfg)
    prev = x
    points, gs, gammas = [x], [], []
    for k in range(1, cfg.n + 1):
        l = counter(k)
        g = _pick(oracle, cfg, x, k - 1)
        gamma = _rg_gamma(h, _gap(oracle, x, f_star), l)
        x_new = x - gamma * g + ((l - 1) / (l + 1)) * (x - prev)
        prev, x = x, x_new
        points.append(x)
        gs.append(g)
        gammas.append(gamma)
    _gap(oracle, x, f_star)
    return points, gs, gammas


def heavyball_rg_run(oracle: Oracle, cfg: RunConfig) -> IterateTrace:
    """Heavy-ball for relative growth ``f - f* <= h(d^2)``:
    ``gamma_{k-1} = 1/(2(k+1)) / h'(h^{-1}(f(x_{k-1}) - f*))``."""
    points, gs, gammas = _momentum_rg(oracle, cfg, "hb-rg", lambda k: k)
    return _finish(oracle, cfg, points, gs, gammas, "hb-rg", growth=cfg.growth.kind)


def restart_cycle_length(kappa: float) -> int:
    m = math.floor(kappa * math.e) - 1
    if m < 1:
        raise RunError(f"kappa={kappa} gives an empty restart cycle")
    return m


def restart_counter(k: int, m: int) -> int:
    """Inner index ``l`` in ``1..m`` for outer step ``k >= 1``."""
    return (k - 1) % m + 1


def heavyball_restart_run(oracle: Oracle, cfg: RunConfig) -> IterateTrace:
    """The relative-growth heavy-ball restarted every ``floor(kappa e) - 1`` steps."""
    if cfg.kappa is None:
        raise RunError("hb-restart needs kappa")
    m = restart_cycle_length(cfg.kappa)
    points, gs, gammas = _momentum_rg(oracle, cfg, "hb-restart", lambda k: restart_counter(k, m))
    return _finish(oracle, cfg, points, gs, gammas, "hb-restart", growth=cfg.growth.kind, kappa=cfg.kappa, cycle=m)


RUNNERS = {
    "subgrad": subgradient_run,
    "subgrad-els": subgradient_ls_run,
    "hb": heavyball_run,
    "hb-ls": heavyball_ls_run,
    "hb-rg": heavyball_rg_run,
    "hb-restart": heavyball_restart_run,
}


def run(algorithm: str, oracle: Oracle, cfg: RunConfig) -> IterateTrace:
    try:
        runner = RUNNERS[algorithm]
    except KeyError:
        raise RunError(f"unknown algorithm {algorithm!r}; choose from {sorted(RUNNERS)}") from None
    return runner(oracle, cfg)


# --- certificates ---


def _trace_L(trace, oracle, L):
    L = L if L is not None else trace.meta.get("L", None if oracle is None else oracle.L)
    if L is None:
        raise RunError("L is needed to evaluate this certificate")
    return float(L)


def lyapunov_trace(trace: IterateTrace, oracle: Oracle, L: float | None = None) -> np.ndarray:
    """``V_0 .. V_{n+1}`` with
    ``V_k = k (f(x_{k-1}) - f*) + (L/2) |x_0 - pi(x_0) - sum_{i<k} g_i / L|^2``.

    ``V_{n+1}`` uses the subgradient queried at ``x_n``.
    """
    L = _trace_L(trace, oracle, L)
    n = trace.n
    if len(trace.subgrads) < n + 1:
        raise RunError("trace lacks the subgradient at x_n")
    r0 = trace.x0 - oracle.project(trace.x0)
    csum = np.vstack([np.zeros_like(r0), np.cumsum(trace.subgrads[: n + 1], axis=0)])
    gaps = trace.values - oracle.f_star
    out = np.empty(n + 2)
    for k in range(n + 2):
        w = r0 - csum[k] / L
        out[k] = (k * gaps[k - 1] if k > 0 else 0.0) + 0.5 * L * float(w @ w)
    return out


def optimality_condition_residual(trace: IterateTrace, oracle: Oracle | None, L: float | None, k: int) -> float:
    """``<g_k, x_k - [k/(k+1) x_{k-1} + x_0/(k+1) - (1/(k+1)) sum_{i<k} g_i / L]>``.

    Nonpositive values certify the sufficient condition for the
    ``(L/2) R^2 / (n+1)`` last-iterate rate.
    """
    L = _trace_L(trace, oracle, L)
    if not 1 <= k <= min(trace.n, len(trace.subgrads) - 1):
        raise IndexError(f"residual index {k} outside 1..{trace.n}")
    P, G = trace.points, trace.subgrads
    target = (k / (k + 1)) * P[k - 1] + P[0] / (k + 1) - G[:k].sum(axis=0) / (L * (k + 1))
    return float(G[k] @ (P[k] - target))


def optimality_residuals(trace, oracle=None, L=None) -> np.ndarray:
    """Residuals for ``k = 1 .. n``."""
    return np.array([optimality_condition_residual(trace, oracle, L, k) for k in range(1, trace.n + 1)])


def distance_decrease_certificate(trace: IterateTrace, oracle: Oracle, L: float | None = None) -> np.ndarray:
    """``(L/2) d(x_k)^2 - (L/2) d(x_{k+1})^2 - (f(x_k) - f*)`` for ``k < n``.

    Nonnegative along the constant ``1/L`` subgradient method on QG+(L).
    """
    L = _trace_L(trace, oracle, L)
    d2 = np.array([np.sum((x - oracle.project(x)) ** 2) for x in trace.points])
    gaps = trace.values - oracle.f_star
    return 0.5 * L * (d2[:-1] - d2[1:]) - gaps[:-1]
