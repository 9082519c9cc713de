import numpy as np
import pytest

from qgplus import GrowthFn, RunConfig, RunError, StepSchedule, run
from qgplus.algos import (
    distance_decrease_certificate,
    lyapunov_trace,
    optimality_condition_residual,
    optimality_residuals,
    restart_counter,
    restart_cycle_length,
)
from qgplus.core import ACTIVE_TOL, OracleError
from qgplus.interp import random_valid_instance
from qgplus.zoo import huber_oracle, quadratic_diag_oracle, supnorm_oracle, supnormsq_oracle


def test_subgradient_on_huber_walks_down_by_one():
    tr = run("subgrad", huber_oracle(1.0, 1.0), RunConfig([11.0], 10, StepSchedule.constant(1.0)))
    np.testing.assert_array_equal(tr.points[:, 0], np.arange(11.0, 0.0, -1.0))
    assert tr.values.sum() == 60.5
    assert len(tr.subgrads) == 11 and len(tr.gammas) == 10


def test_heavy_ball_forms_agree():
    ds, o = random_valid_instance(7, 3, 6, 1.2)
    x0 = np.array([2.0, -1.0, 0.5])
    a = run("hb", o, RunConfig(x0, 15, L=1.2, form="averaged"))
    m = run("hb", o, RunConfig(x0, 15, L=1.2, form="momentum"))
    np.testing.assert_allclose(a.points, m.points, atol=1e-12)
    np.testing.assert_allclose(a.gammas, 1.0 / (1.2 * (np.arange(1, 16) + 1)))


def test_heavy_ball_takes_L_from_tag_and_needs_it():
    o = huber_oracle(2.0, 1.0)
    tr = run("hb", o, RunConfig([3.0], 4))
    assert tr.meta["L"] == 2.0
    with pytest.raises(RunError):
        run("hb", supnorm_oracle(1.0, 1), RunConfig([3.0], 4))


def test_line_search_heavy_ball_subgradients_orthogonal_to_search_direction():
    ds, o = random_valid_instance(11, 2, 7, 1.0)
    tr = run("hb-ls", o, RunConfig([2.0, 2.0], 12))
    v = np.cumsum(tr.subgrads[:-1], axis=0)
    dots = np.einsum("ij,ij->i", tr.subgrads[1:], v)
    assert np.max(np.abs(dots)) <= 1e-6 * (1 + np.abs(v).max())


def test_lyapunov_has_n_plus_two_values_and_decreases():
    ds, o = random_valid_instance(2, 2, 5, 1.0)
    tr = run("hb", o, RunConfig([2.5, -2.0], 10))
    V = lyapunov_trace(tr, o)
    assert V.shape == (12,)
    assert np.all(np.diff(V) <= 1e-10)


def test_residual_indexing():
    o = huber_oracle(1.0, 1.0)
    tr = run("hb", o, RunConfig([5.0], 6))
    assert optimality_residuals(tr, o).shape == (6,)
    with pytest.raises(IndexError):
        optimality_condition_residual(tr, o, 1.0, 0)
    with pytest.raises(IndexError):
        optimality_condition_residual(tr, o, 1.0, 7)


def test_distance_decrease_certificate_nonnegative_for_unit_steps():
    for seed in range(10):
        ds, o = random_valid_instance(seed, 3, 6, 1.5)
        tr = run("subgrad", o, RunConfig(np.full(3, 2.0), 12, StepSchedule.constant(1.0 / 1.5)))
        # pieces within ACTIVE_TOL of the max count as active, so near the
        # optimal set the certificate holds to that accuracy
        assert distance_decrease_certificate(tr, o, 1.5).min() >= -ACTIVE_TOL


def test_restart_indexing():
    assert restart_cycle_length(4.0) == 9
    assert [restart_counter(k, 3) for k in range(1, 8)] == [1, 2, 3, 1, 2, 3, 1]
    with pytest.raises(RunError):
        restart_cycle_length(0.5)


def test_restart_reduces_to_rg_run_within_first_cycle():
    o = quadratic_diag_oracle(1.0, 4.0, 2)
    h = GrowthFn.linear(4.0)
    a = run("hb-restart", o, RunConfig([1.0, -2.0], 9, growth=h, kappa=4.0, f_star=0.0))
    b = run("hb-rg", o, RunConfig([1.0, -2.0], 9, growth=h, f_star=0.0))
    np.testing.assert_array_equal(a.points, b.points)
    assert a.meta["cycle"] == 9


def test_growth_runs_need_f_star_and_reject_wrong_value():
    o = supnorm_oracle(1.0, 1)
    with pytest.raises(RunError):
        run("hb-rg", o, RunConfig([1.0], 3, growth=GrowthFn.sqrt(1.0)))
    with pytest.raises(RunError):
        run("hb-rg", o, RunConfig([1.0], 3, growth=GrowthFn.sqrt(1.0), f_star=0.5))


@pytest.mark.parametrize("bad", [dict(n=0), dict(n=2.5), dict(kappa=0.5), dict(form="other")])
def test_run_config_validation(bad):
    kw = dict(x0=[1.0], n=3) | bad
    with pytest.raises(RunError):
        RunConfig(**kw)


def test_dimension_mismatch_and_unknown_algorithm():
    with pytest.raises(RunError):
        run("hb", huber_oracle(), RunConfig([1.0, 2.0], 3))
    with pytest.raises(RunError):
        run("newton", huber_oracle(), RunConfig([1.0], 3))


def test_stateful_oracle_reset_between_runs():
    o = supnormsq_oracle(1.0, 4, "adversarial")
    a = run("hb", o, RunConfig(np.ones(4), 3))
    b = run("hb", o, RunConfig(np.ones(4), 3))
    np.testing.assert_array_equal(a.points, b.points)


def test_missing_projection_surfaces_in_certificates():
    from qgplus.core import SmoothOracle

    o = SmoothOracle(lambda x: float(x @ x), lambda x: 2 * x, 1, 0.0)
    tr = run("subgrad", o, RunConfig([1.0], 3, StepSchedule.constant(0.1)))
    with pytest.raises(OracleError):
        lyapunov_trace(tr, o, 2.0)


def _half_square():
    from qgplus.core import QGPlus, SmoothOracle

    return SmoothOracle(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), 1, 0.0, (QGPlus(1.0),),
                        projector=lambda x: np.zeros_like(x))


def test_small_hand_computed_steps():
    o = _half_square()
    hb = run("hb", o, RunConfig([1.0], 1))
    assert hb.points[1, 0] == 0.5 and hb.values[1] == 0.125
    els = run("subgrad-els", o, RunConfig([1.0], 1))
    assert abs(els.points[1, 0]) <= 1e-12
    ls = run("hb-ls", o, RunConfig([1.0], 1))
    assert ls.values[1] <= 0.25
    rg = run("hb-rg", supnorm_oracle(1.0, 1), RunConfig([2.0], 1, growth=GrowthFn.sqrt(1.0), f_star=0.0))
    assert rg.gammas[0] == 1.0 and rg.points[1, 0] == 1.0 and rg.values[1] <= 2 / np.sqrt(2)


def test_start_at_optimum_stays_put():
    o = huber_oracle(1.0, 1.0)
    for alg, cfg in (("subgrad", RunConfig([0.0], 5, StepSchedule.constant(1.0))), ("hb", RunConfig([0.0], 5))):
        tr = run(alg, o, cfg)
        assert not np.any(tr.points)
        np.testing.assert_array_equal(lyapunov_trace(tr, o), 0.0)


def test_sqrt_growth_reproduces_lipschitz_step():
    o = supnorm_oracle(2.0, 3)
    tr = run("hb-rg", o, RunConfig([3.0, -1.0, 2.0], 12, growth=GrowthFn.sqrt(2.0), f_star=0.0))
    gaps = tr.values[:-1]
    k = np.arange(1, 13)
    np.testing.assert_allclose(tr.gammas, gaps / (4.0 * (k + 1)), rtol=1e-15)


def test_lyapunov_starts_at_half_L_R_squared():
    ds, o = random_valid_instance(1, 3, 6, 1.4)
    tr = run("hb", o, RunConfig([1.0, 2.0, -2.0], 5))
    R = np.linalg.norm(tr.x0 - o.project(tr.x0))
    assert lyapunov_trace(tr, o)[0] == pytest.approx(0.7 * R * R, rel=1e-14)


@pytest.mark.parametrize("make", [
    lambda: huber_oracle(1.0, 1.0, 2), lambda: supnormsq_oracle(1.0, 3), lambda: quadratic_diag_oracle(1.0, 4.0, 3),
])
def test_forms_agree_on_instances_up_to_100_steps(make):
    o = make()
    x0 = np.linspace(3.0, -2.0, o.dim)
    a = run("hb", o, RunConfig(x0, 100, form="averaged"))
    m = run("hb", o, RunConfig(x0, 100, form="momentum"))
    np.testing.assert_allclose(a.points, m.points, rtol=0, atol=1e-12)


def test_residuals_certify_the_final_rate(battery):
    from qgplus.bounds import BoundSpec, verify_trace_against_bound

    for item in battery[:30]:
        tr = run("hb-ls", item.oracle, RunConfig(item.x0, 20))
        if optimality_residuals(tr, item.oracle, item.L).max() <= 1e-8:
            assert verify_trace_against_bound(tr, item.oracle, BoundSpec("hb-optimal", L=item.L)).ok


def test_single_step_restart_cycle():
    assert restart_cycle_length(1.0) == 1
    o = quadratic_diag_oracle(2.0, 2.0, 2)
    tr = run("hb-restart", o, RunConfig([1.0, 1.0], 4, growth=GrowthFn.linear(2.0), kappa=1.0, f_star=0.0))
    np.testing.assert_allclose(tr.gammas, 1.0 / (2.0 * 2.0))
