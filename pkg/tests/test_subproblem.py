"""Tests for the regularized subproblem solvers."""

import numpy as np
import pytest
import scipy.sparse as sp

from marq.exceptions import InvalidArgumentError, SubproblemError
from marq.models.regularized import RegularizedModel, regularized_grad, regularized_value
from marq.services.factorization import FlopCounter
from marq.services.subproblem import solve_q1, solve_q2, solve_q2_smallscale_oracle


def _cubic(g, B, lam):
    return RegularizedModel(base_f=0.0, g=np.asarray(g, dtype=float), B=B, lam=lam, q=2)


def test_q1_step_is_negative_scaled_gradient():
    g = np.array([3.0, -1.0])
    result = solve_q1(g, 2.0)

    np.testing.assert_allclose(result.step, [-1.5, 0.5])
    assert result.model_decrease == pytest.approx(5.0)
    assert result.factorizations == 0
    assert result.flops == 0


def test_q1_rejects_nonpositive_lambda():
    with pytest.raises(InvalidArgumentError):
        solve_q1(np.ones(2), 0.0)


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_spd_step_satisfies_secular_equation_and_inner_rule(lam):
    B = np.diag([1.0, 3.0, 7.0])
    g = np.array([1.0, -2.0, 0.5])
    result = solve_q2(g, B, lam, theta=0.5)

    s = result.step
    assert result.sigma == pytest.approx(lam * np.linalg.norm(s), rel=1e-6)
    residual = np.linalg.norm(regularized_grad(_cubic(g, B, lam), s))
    assert residual <= 0.5 * np.linalg.norm(s) ** 2
    assert result.model_decrease > 0.0
    assert not result.hard_case


def test_indefinite_hessian_still_decreases_the_model():
    B = np.array([[-2.0, 0.5], [0.5, 1.0]])
    g = np.array([0.3, -0.4])
    result = solve_q2(g, B, 1.0, theta=0.0)

    assert regularized_value(_cubic(g, B, 1.0), result.step) < 0.0
    # The shifted matrix at the solution is positive semidefinite.
    assert np.min(np.linalg.eigvalsh(B + result.sigma * np.eye(2))) >= -1e-8


def test_hard_case_moves_along_negative_curvature():
    g = np.array([0.0, 1.0])
    B = np.diag([-1.0, 2.0])
    result = solve_q2(g, B, 1.0, theta=0.5)

    assert result.hard_case
    assert result.step_norm == pytest.approx(1.0, rel=1e-6)
    assert abs(result.step[0]) == pytest.approx(np.sqrt(8.0) / 3.0, rel=1e-5)
    assert result.step[1] == pytest.approx(-1.0 / 3.0, rel=1e-5)
    assert regularized_value(_cubic(g, B, 1.0), result.step) < 0.0


def test_secular_root_is_the_golden_ratio():
    # t (1 + t) = 1 along -g
    result = solve_q2(np.array([1.0, 0.0]), np.eye(2), 1.0, theta=0.0)

    np.testing.assert_allclose(result.step, [-0.61803, 0.0], atol=1e-5)
    assert result.sigma == pytest.approx(0.61803, abs=1e-5)


def test_small_lambda_secular_root():
    # 0.05 t^2 + t - 1 = 0
    result = solve_q2(np.array([1.0]), np.array([[1.0]]), 0.05, theta=0.0)

    assert result.step[0] == pytest.approx(-0.95445, abs=1e-5)


def test_nearly_orthogonal_gradient_resolves_to_global_minimizer():
    g = np.array([1e-9, 1.0])
    B = np.diag([-1.0, 2.0])
    result = solve_q2(g, B, 1.0, theta=0.5)

    assert result.step_norm == pytest.approx(1.0, rel=1e-6)
    assert abs(result.step[0]) == pytest.approx(np.sqrt(8.0) / 3.0, rel=1e-5)
    assert result.step[1] == pytest.approx(-1.0 / 3.0, rel=1e-5)
    assert result.residual_norm <= 1e-6
    shifted = B + result.step_norm * np.eye(2)
    assert np.min(np.linalg.eigvalsh(shifted)) >= -1e-6
    assert result.model_decrease >= (1.0 - 1e-6) * result.step_norm**3 / 3.0


def test_zero_gradient_with_singular_psd_hessian_stays_put():
    result = solve_q2(np.zeros(3), np.diag([1.0, 0.0, 2.0]), 1.0)

    np.testing.assert_array_equal(result.step, np.zeros(3))
    assert result.model_decrease == 0.0
    assert not result.hard_case
    assert result.factorizations == 1


def test_zero_gradient_with_indefinite_hessian_leaves_the_saddle():
    g = np.zeros(2)
    B = np.diag([-1.0, 2.0])
    result = solve_q2(g, B, 1.0)

    assert result.hard_case
    assert result.step_norm == pytest.approx(1.0, rel=1e-6)
    assert result.model_decrease > 0.0
    assert regularized_value(_cubic(g, B, 1.0), result.step) < 0.0


@pytest.mark.parametrize(
    ("g", "B", "lam"),
    [
        ([1.0, 1.0], [[1.0, 0.0], [0.0, 3.0]], 1.0),
        ([0.5, -1.0], [[-1.0, 0.3], [0.3, 0.5]], 2.0),
        ([-1.5, 0.2], [[0.2, -0.8], [-0.8, 0.1]], 0.7),
    ],
)
def test_matches_grid_search_oracle(g, B, lam):
    g, B = np.array(g), np.array(B)
    step = solve_q2(g, B, lam, theta=0.0).step
    grid_step = 5e-3
    radius = float(np.max(np.abs(step))) + 0.2
    reference = solve_q2_smallscale_oracle(g, B, lam, radius, grid_step)

    assert np.max(np.abs(step - reference)) <= 2 * grid_step


def test_sparse_and_dense_hessians_agree():
    n = 12
    T = sp.diags([-1.0, 2.5, -1.0], [-1, 0, 1], shape=(n, n), format="csr")
    g = np.linspace(-1.0, 1.0, n)

    sparse = solve_q2(g, T, 0.5, theta=0.0)
    dense = solve_q2(g, T.toarray(), 0.5, theta=0.0)

    np.testing.assert_allclose(sparse.step, dense.step, rtol=1e-6, atol=1e-9)


def test_counter_matches_reported_work():
    counter = FlopCounter()
    B = np.array([[-2.0, 0.5], [0.5, 1.0]])
    result = solve_q2(np.array([0.3, -0.4]), B, 1.0, counter=counter)

    assert counter.factorizations == result.factorizations
    assert counter.flops == result.flops
    assert counter.dense_flops == result.dense_flops
    assert result.factorizations >= 1


def test_iteration_cap_raises_with_work_attached():
    g = np.array([0.0, 1.0])
    B = np.diag([-1.0, 2.0])
    with pytest.raises(SubproblemError) as exc_info:
        solve_q2(g, B, 1.0, max_iters=1)

    assert exc_info.value.factorizations == 1
    assert exc_info.value.dense_flops > 0


def test_invalid_arguments_are_rejected():
    with pytest.raises(InvalidArgumentError):
        solve_q2(np.ones(2), np.eye(2), -1.0)
    with pytest.raises(InvalidArgumentError):
        solve_q2(np.ones(2), np.eye(2), 1.0, theta=-0.1)
    with pytest.raises(InvalidArgumentError):
        solve_q2(np.ones(2), np.eye(3), 1.0)


def test_grid_oracle_rejects_large_dimensions():
    with pytest.raises(InvalidArgumentError):
        solve_q2_smallscale_oracle(np.ones(4), np.eye(4), 1.0, 1.0, 0.1)


def test_grid_oracle_box_can_be_centered():
    g, B = np.array([1.0, 0.0]), np.eye(2)
    around = solve_q2_smallscale_oracle(g, B, 1.0, 0.05, 1e-3, center=np.array([-0.6, 0.0]))

    np.testing.assert_allclose(around, [-0.618, 0.0], atol=2e-3)
    with pytest.raises(InvalidArgumentError):
        solve_q2_smallscale_oracle(g, B, 1.0, 0.05, 1e-3, center=np.zeros(3))
