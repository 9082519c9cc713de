"""Acceptance criteria; a PASS/FAIL line per criterion is printed in the
terminal summary (section "acceptance criteria")."""

import filecmp
import math

import numpy as np
import pytest

from qgplus import (
    GrowthFn,
    RunConfig,
    StepSchedule,
    build_extension,
    check_qgplus_interpolation,
    huber_oracle,
    lb3d_instance,
    lyapunov_trace,
    mixed_oracle,
    quadratic_diag_oracle,
    run,
    supnorm_oracle,
    supnormsq_oracle,
    u_sequence,
)
from qgplus.algos import optimality_residuals, restart_cycle_length
from qgplus.bounds import BoundSpec, bound_value, verify_trace_against_bound
from qgplus.core import IterateTrace, distance_to_optset, pr_average, qgplus_violation
from qgplus.harness.config import parse_config
from qgplus.harness.experiment import run_experiment
from qgplus.harness.studies import conjecture_probe, emit_plot_data, table1, write_table1
from qgplus.interp import random_valid_instance
from qgplus.zoo import cycle_abs, cycle_linf

N_BATTERY = 20


def _hb_runs(battery):
    for it in battery:
        for alg, cfg in (("hb", RunConfig(it.x0, N_BATTERY, L=it.L)), ("hb-ls", RunConfig(it.x0, N_BATTERY))):
            yield it, alg, run(alg, it.oracle, cfg)


@pytest.fixture(scope="module")
def hb_battery_runs(battery):
    return list(_hb_runs(battery))


@pytest.mark.criterion(1, "averaged subgradient gap is tight on Huber (5.5)")
def test_averaged_gap_tight_on_huber():
    tr = run("subgrad", huber_oracle(1.0, 1.0), RunConfig([11.0], 10, StepSchedule.constant(1.0)))
    avg = float(np.mean(tr.values))
    assert abs(avg - 5.5) <= 1e-9
    rep = verify_trace_against_bound(tr, huber_oracle(1.0, 1.0), BoundSpec("avg-qg", L=1.0))
    assert abs(rep.bound - 5.5) <= 1e-9 and rep.ok


@pytest.mark.criterion(2, "heavy-ball and line-search heavy-ball meet (L/2)R^2/(n+1)")
def test_heavy_ball_upper_bound_on_battery(hb_battery_runs):
    assert len(hb_battery_runs) == 200
    failures = []
    for it, alg, tr in hb_battery_runs:
        if alg == "hb-ls":
            assert "L" not in tr.meta
        rep = verify_trace_against_bound(tr, it.oracle, BoundSpec("hb-optimal", L=it.L), "upper", abs_tol=1e-8)
        if not rep.ok:
            failures.append((it.index, alg, rep.observed, rep.bound))
    assert max(it.d for it, _, _ in hb_battery_runs) <= 5
    assert not failures


@pytest.mark.criterion(3, "Lyapunov values never increase by more than 1e-10")
def test_lyapunov_monotone_on_battery(hb_battery_runs):
    worst = max(float(np.diff(lyapunov_trace(tr, it.oracle, it.L)).max()) for it, _, tr in hb_battery_runs)
    assert worst <= 1e-10


@pytest.mark.criterion(4, "adversarial sup-norm squared forces gap (L/2)R^2/(n+1)")
@pytest.mark.parametrize("alg", ["subgrad", "hb"])
def test_first_order_lower_bound(alg):
    n = 6
    o = supnormsq_oracle(1.0, n + 1, "adversarial")
    tr = run(alg, o, RunConfig(np.ones(n + 1), n, StepSchedule.constant(1.0)))
    rep = verify_trace_against_bound(tr, o, BoundSpec("first-order-lb", L=1.0), "lower", abs_tol=1e-10)
    assert rep.ok
    assert rep.bound == pytest.approx(0.5, abs=1e-15)


@pytest.mark.criterion(5, "three-dimensional construction keeps last gap at (L/2)L gamma R^2")
def test_lb3d_construction():
    inst = lb3d_instance(1.0, 5, None, 1e-4)
    tr = run("subgrad", inst.oracle, RunConfig(inst.x0, 5, StepSchedule.custom(inst.gammas)))
    R2 = distance_to_optset(inst.oracle, tr.x0) ** 2
    ratio = (tr.values[-1] - inst.oracle.f_star) / R2
    target = bound_value(BoundSpec("last-lb-qg", L=1.0, R=1.0, n=5, gammas=tuple(inst.gammas)))
    assert target == 0.5
    assert abs(ratio - target) <= 0.05 * target
    for i in range(5):
        np.testing.assert_allclose(tr.points[i], inst.expected_iterate(i), rtol=0, atol=1e-12)


@pytest.mark.criterion(6, "u-sequence identities")
def test_u_sequence_identities():
    u = u_sequence(10_000)
    assert u[1] == 2.0
    inv = np.cumsum(1.0 / u[1:1001])
    assert np.max(np.abs(u[1:1001] - (1.0 + 2.0 * inv))) <= 1e-9
    assert 0.98 <= u[10_000] / 200.0 <= 1.02


@pytest.mark.criterion(7, "decreasing-step conjecture probe (soft: violations are findings)")
def test_conjecture_probe():
    report = conjecture_probe((5, 10, 20, 50), 100, 0)
    for row in report["rows"]:
        assert row["huber_rel_error"] <= 1e-6
    assert report["ok"]
    if report["conjecture_violated"]:
        pytest.xfail(f"conjecture finding: {len(report['violations'])} battery runs above the conjectured bound")


@pytest.mark.criterion(8, "cycling counterexamples (constant step on |z|, line-search on sup-norm)")
def test_cycling_counterexamples():
    c = cycle_abs(1.0, 1.0)
    tr = run("subgrad", c.oracle, RunConfig(c.x0, 200, StepSchedule.constant(c.gamma)))
    assert abs(tr.points[2, 0] - tr.points[0, 0]) <= 1e-12
    pr_gap = c.oracle.value(pr_average(tr)) - c.oracle.f_star
    assert abs(pr_gap - 0.25) <= 0.01 * 0.25

    c = cycle_linf("sq", L=1.0)
    cfg = RunConfig(c.x0, 20, selector=c.selector, ls_pick=c.ls_pick)
    tr = run("subgrad-els", c.oracle, cfg)
    rep = verify_trace_against_bound(tr, c.oracle, BoundSpec("els-stuck", L=1.0), "lower", abs_tol=1e-10)
    assert rep.extra["final_gap"] >= rep.bound - 1e-10
    assert rep.extra["pr_gap"] >= rep.bound - 1e-10
    assert rep.ok


@pytest.mark.criterion(9, "interpolation round-trip: checker, exact extension, QG+ probes")
def test_interpolation_round_trip():
    rng = np.random.default_rng(2024)
    for seed in range(100):
        d = int(rng.integers(1, 6))
        m = int(rng.integers(1, 9))
        L = float(rng.uniform(0.5, 2.0))
        ds, _ = random_valid_instance(seed, d, m, L)
        assert check_qgplus_interpolation(ds).valid
        ext = build_extension(ds)
        for x, g, f in zip(ds.xs, ds.gs, ds.fs):
            assert abs(ext.value(x) - f) <= 1e-12 * (1 + abs(f))
        ys = rng.uniform(-5, 5, size=(50, d))
        lin = ds.fs[:, None] + ds.gs @ ys.T - np.sum(ds.gs * ds.xs, axis=1)[:, None]
        vals = np.array([ext.value(y) for y in ys])
        assert np.all(vals[None, :] >= lin - 1e-10)
        assert qgplus_violation(ext, L, np.random.default_rng(seed), 1000, 5.0) <= 1e-10


@pytest.mark.criterion(10, "relative-growth heavy-ball: reductions and bounds")
def test_relative_growth_heavy_ball(battery):
    for it in battery[:20]:
        hb = run("hb", it.oracle, RunConfig(it.x0, 20, L=it.L))
        rg = run("hb-rg", it.oracle, RunConfig(it.x0, 20, growth=GrowthFn.linear(it.L), f_star=it.oracle.f_star))
        np.testing.assert_allclose(rg.points, hb.points, rtol=0, atol=1e-12)

    rng = np.random.default_rng(10)
    for M in (0.5, 1.0, 3.0):
        for o in (supnorm_oracle(M, 1), supnorm_oracle(M, 3)):
            x0 = rng.uniform(-3, 3, size=o.dim)
            tr = run("hb-rg", o, RunConfig(x0, 20, growth=GrowthFn.sqrt(M), f_star=0.0))
            assert verify_trace_against_bound(tr, o, BoundSpec("lipschitz-opt", M=M), "upper", abs_tol=1e-8).ok

    for M, L, dim, delta in ((1.0, 1.0, 1, math.inf), (0.5, 2.0, 2, math.inf), (1.0, 1.0, 1, 0.5), (2.0, 0.5, 3, 1.0)):
        o = mixed_oracle(M, L, dim, delta)
        x0 = rng.uniform(-3, 3, size=dim)
        tr = run("hb-rg", o, RunConfig(x0, 20, growth=GrowthFn.mixed(M, L), f_star=o.f_star))
        R = distance_to_optset(o, x0)
        bound = M * R / math.sqrt(21) + 0.5 * L * R * R / 21
        assert tr.values[-1] - o.f_star <= bound + 1e-8


@pytest.mark.criterion(11, "restarted heavy-ball converges linearly")
def test_restart_linear_rate():
    o = quadratic_diag_oracle(1.0, 4.0, 3)
    kappa = 4.0
    assert restart_cycle_length(kappa) == 9
    h = GrowthFn.linear(4.0)
    x0 = np.random.default_rng(11).uniform(-3, 3, size=3)
    tr = run("hb-restart", o, RunConfig(x0, 45, growth=h, kappa=kappa, f_star=0.0))
    R2 = distance_to_optset(o, x0) ** 2
    rho = 1.0 - 1.0 / (kappa * math.e)
    assert distance_to_optset(o, tr.last) ** 2 <= rho**45 * R2 + 1e-8
    for k in range(46):
        assert tr.values[k] <= h(math.e * rho**k * R2) + 1e-8


@pytest.mark.criterion(12, "optimality-condition residuals, with a perturbed negative control")
def test_optimality_residuals(battery):
    for it in battery[:25]:
        hb = run("hb", it.oracle, RunConfig(it.x0, N_BATTERY, L=it.L))
        assert optimality_residuals(hb, it.oracle, it.L).max() <= 1e-12
        ls = run("hb-ls", it.oracle, RunConfig(it.x0, N_BATTERY))
        assert optimality_residuals(ls, it.oracle, it.L).max() <= 1e-8
        k = 3
        g = hb.subgrads[k]
        if np.linalg.norm(g) == 0:
            continue
        pts = hb.points.copy()
        pts[k] = pts[k] + 1e-3 * g
        bad = IterateTrace(pts, hb.values, hb.subgrads, hb.gammas, dict(hb.meta))
        assert optimality_residuals(bad, it.oracle, it.L)[k - 1] > 0


def _full_outputs(root):
    cfg = parse_config({
        "experiment": "determinism",
        "n": 15,
        "seeds": {"count": 2, "base": 7},
        "instances": [{"id": "interp", "params": {"d": 3, "num_points": 5}}, {"id": "huber", "x0": [4.0]}],
        "algorithms": [{"id": "hb"}, {"id": "hb-ls"}, {"id": "subgrad", "schedule": {"kind": "harmonic", "c": 1}}],
        "checks": [{"bound": "hb-optimal", "algorithms": ["hb", "hb-ls"]}, {"property": "lyapunov-monotone"}],
    })
    run_experiment(cfg, root)
    write_table1(table1(10, 20, 7), root / "table1")
    emit_plot_data(conjecture_probe((5, 10), 20, 7), root / "conjecture.csv")


@pytest.mark.criterion(13, "same base seed gives byte-identical CSV/JSON outputs")
def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _full_outputs(a)
    _full_outputs(b)
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert len(files) > 10
    match, mismatch, errors = filecmp.cmpfiles(a, b, [str(f) for f in files], shallow=False)
    assert not mismatch and not errors
