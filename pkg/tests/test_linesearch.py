import numpy as np
import pytest

from qgplus.core import SmoothOracle
from qgplus.linesearch import (
    LineProblem,
    UnboundedLineError,
    exact_line_search,
    golden_line_search,
    orthogonal_subgradient,
)
from qgplus.zoo import huber_oracle, supnorm_oracle, supnormsq_oracle


def test_huber_line_search_finds_minimizer():
    alpha, x = exact_line_search(huber_oracle(1.0, 1.0), [6.0], [-1.0])
    assert alpha == pytest.approx(6.0, abs=1e-12)
    np.testing.assert_allclose(x, [0.0], atol=1e-12)
    alpha, _ = exact_line_search(huber_oracle(1.0, 1.0), [6.0], [-2.0])
    assert alpha == pytest.approx(3.0, abs=1e-12)


def test_abs_minimizer_from_either_side():
    o = supnorm_oracle(1.0, 1)
    assert exact_line_search(o, [3.0], [-1.0])[0] == pytest.approx(3.0, abs=1e-12)
    assert exact_line_search(o, [3.0], [1.0])[0] == pytest.approx(-3.0, abs=1e-12)
    assert exact_line_search(o, [0.0], [1.0])[0] == 0.0


def test_zero_direction_is_noop():
    alpha, x = exact_line_search(supnorm_oracle(1.0, 2), [1.0, 2.0], [0.0, 0.0])
    assert alpha == 0.0
    np.testing.assert_array_equal(x, [1.0, 2.0])


def test_farthest_pick_on_flat_segment():
    o = supnormsq_oracle(1.0, 3)
    # along -e1 from (1,1,1) the max stays at 1 for first coordinate in [-1, 1]
    first, _ = exact_line_search(o, [1.0, 1.0, 1.0], [-1.0, 0.0, 0.0], pick="first")
    far, x = exact_line_search(o, [1.0, 1.0, 1.0], [-1.0, 0.0, 0.0], pick="farthest")
    assert 0.0 <= first <= far
    assert far == pytest.approx(2.0, abs=1e-12)
    np.testing.assert_allclose(x, [-1.0, 1.0, 1.0], atol=1e-12)


def test_unbounded_direction_raises():
    lin = SmoothOracle(lambda x: float(x[0]), lambda x: np.array([1.0]), 1)
    with pytest.raises(UnboundedLineError):
        exact_line_search(lin, [0.0], [-1.0])


def test_line_problem_and_golden_agree():
    o = huber_oracle(2.0, 0.5, 2)
    lp = LineProblem(np.array([3.0, -1.0]), np.array([-1.0, 0.5]), o)
    a, x = lp.solve()
    b, y = golden_line_search(o, lp.base, lp.direction)
    assert o.value(x) == pytest.approx(o.value(y), abs=1e-9)


def test_orthogonal_subgradient_mixes_active_pieces():
    o = supnorm_oracle(1.0, 2)
    v = np.array([1.0, -1.0])
    g = orthogonal_subgradient(o, [1.0, 1.0], v)
    np.testing.assert_allclose(g, [0.5, 0.5])
    assert abs(g @ v) <= 1e-15


def test_line_search_examples():
    parabola = SmoothOracle(lambda x: float((x[0] - 2.0) ** 2), lambda x: 2.0 * (x - 2.0), 1)
    assert exact_line_search(parabola, [0.0], [1.0])[0] == pytest.approx(2.0, abs=1e-12)
    alpha, x = exact_line_search(huber_oracle(1.0, 1.0), [5.0], [-1.0])
    assert alpha == pytest.approx(5.0, abs=1e-12)


def test_line_search_optimality_and_idempotence():
    from qgplus.interp import random_valid_instance

    rng = np.random.default_rng(0)
    for seed in range(20):
        _, o = random_valid_instance(seed, 3, 6, 1.0)
        base, d = rng.uniform(-3, 3, 3), rng.normal(size=3)
        alpha, x = exact_line_search(o, base, d)
        f = o.value(x)
        for eps in (1e-6, -1e-6):
            assert o.value(base + (alpha + eps) * d) >= f - 1e-10
        again, _ = exact_line_search(o, x, d)
        assert abs(again) <= 1e-9 * (1 + abs(alpha))


def test_orthogonal_combination_is_a_subgradient():
    from qgplus.core import subgradient_violation

    o = supnorm_oracle(1.0, 2)
    x, v = np.array([1.0, 1.0]), np.array([1.0, -1.0])
    g = orthogonal_subgradient(o, x, v)
    ys = np.random.default_rng(3).uniform(-10, 10, size=(1000, 2))
    assert min(o.value(y) - o.value(x) - g @ (y - x) for y in ys) >= -1e-10
    assert subgradient_violation(o, 0, 100) >= -1e-12


def test_orthogonal_subgradient_vacuous_and_failure_cases():
    from qgplus.linesearch import LineSearchError

    o = supnorm_oracle(1.0, 2)
    np.testing.assert_array_equal(orthogonal_subgradient(o, [1.0, 1.0], np.zeros(2)), [1.0, 0.0])
    with pytest.raises(LineSearchError):
        orthogonal_subgradient(o, [2.0, 1.0], np.array([1.0, 0.0]))
    q = huber_oracle(1.0, 1.0, 2)
    np.testing.assert_allclose(orthogonal_subgradient(q, [0.5, 0.0], [0.0, 1.0]), [0.5, 0.0])
