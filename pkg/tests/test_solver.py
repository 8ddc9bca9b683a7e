"""Tests for the AR q / MAR q driver."""

import math

import numpy as np
import pytest

from marq.config import SolverConfig
from marq.constants import METHOD_ARQ, METHOD_MARQ
from marq.core.diagnostics import descent_violations, model_decrease_violations
from marq.core.solver import (
    MultilevelSolver,
    arq_minimize,
    compute_rho,
    marq_minimize,
    update_lambda,
)
from marq.exceptions import InvalidArgumentError, ObjectiveOverflowError
from marq.models.oracle import ObjectiveOracle
from marq.models.report import ModelKind, RunStatus
from marq.problems.analytic import convex_quartic, identity_hierarchy, quadratic, rosenbrock
from marq.problems.grid import build_hierarchy, random_init
from marq.services.audit import identity_collapse_deviation
from marq.services.metrics import check_flop_conservation


class TestRatioAndUpdate:
    def test_rho_is_ratio_above_floor(self):
        assert compute_rho(0.5, 1.0, 1e-12) == pytest.approx(0.5)

    def test_rho_undefined_at_or_below_floor(self):
        assert compute_rho(1.0, 1e-20, 1e-16) is None
        assert compute_rho(1.0, 0.0, 0.0) is None

    def test_very_successful_shrinks_by_gamma2(self):
        cfg = SolverConfig()
        assert update_lambda(0.9, 1.0, cfg) == pytest.approx(cfg.gamma2)

    def test_successful_shrinks_by_gamma1(self):
        cfg = SolverConfig()
        assert update_lambda(0.5, 1.0, cfg) == pytest.approx(cfg.gamma1)

    def test_unsuccessful_grows_by_gamma3(self):
        cfg = SolverConfig()
        assert update_lambda(0.01, 1.0, cfg) == pytest.approx(cfg.gamma3)
        assert update_lambda(None, 1.0, cfg) == pytest.approx(cfg.gamma3)

    def test_shrinking_is_floored_at_lambda_min(self):
        cfg = SolverConfig(lambda_min=0.1, lambda0=1.0)
        assert update_lambda(0.99, 0.15, cfg) == pytest.approx(0.1)

    @pytest.mark.parametrize(
        ("rho", "expected"), [(0.8, 0.025), (0.5, 0.0425), (0.05, 0.1)]
    )
    def test_default_update_from_starting_lambda(self, rho, expected):
        assert update_lambda(rho, 0.05, SolverConfig()) == pytest.approx(expected)


class TestOneLevel:
    @pytest.mark.parametrize("q", [1, 2])
    def test_quadratic_converges_to_minimizer(self, spd_quadratic, q):
        oracle, x_star = spd_quadratic
        report = arq_minimize(oracle, np.zeros(4), q=q, seed=7)

        assert report.status is RunStatus.CONVERGED
        assert report.method == METHOD_ARQ
        assert report.seed == 7
        assert report.grad_norm_final <= 1e-7
        np.testing.assert_allclose(report.x_final, x_star, atol=1e-6)
        assert report.it_T == report.it_f == len(report.trace)

    def test_rosenbrock_converges(self):
        report = arq_minimize(rosenbrock(), np.array([-1.2, 1.0]))

        assert report.converged
        np.testing.assert_allclose(report.x_final, [1.0, 1.0], atol=1e-5)
        assert descent_violations(report) == []

    def test_first_step_on_half_square(self):
        # 0.05 t^2 + t - 1 = 0
        report = arq_minimize(quadratic(np.eye(1)), np.ones(1))

        assert report.trace[0].step_norm == pytest.approx(0.954451, abs=1e-6)

    def test_exact_model_halves_lambda_every_iteration(self):
        report = arq_minimize(quadratic(np.eye(1)), np.ones(1))

        assert report.converged
        assert len(report.trace) == 3
        assert all(r.successful for r in report.trace)
        assert [r.rho for r in report.trace] == pytest.approx([1.0, 1.0, 1.0], rel=1e-6)
        assert [r.lam for r in report.trace] == pytest.approx([0.05, 0.025, 0.0125])

    def test_starting_lambda_can_be_overridden(self, spd_quadratic):
        oracle, _ = spd_quadratic
        report = arq_minimize(oracle, np.zeros(4), lam0=0.3)

        assert report.trace[0].lam == pytest.approx(0.3)
        with pytest.raises(InvalidArgumentError):
            arq_minimize(oracle, np.zeros(4), lam0=0.0)

    @pytest.mark.parametrize("q", [1, 2])
    def test_accepted_steps_decrease_the_model_enough(self, q):
        top = build_hierarchy(4, 2).top
        report = arq_minimize(top.oracle, random_init(top.dim, 1.0, seed=2), q=q)

        assert report.converged
        assert model_decrease_violations(report, q) == []

    def test_trace_records_rejected_steps_without_moving(self, quartic):
        # With q = 1 the first step -g / lambda0 overshoots badly.
        report = arq_minimize(quartic, np.full(8, 3.0), q=1)

        assert not report.trace[0].successful
        assert descent_violations(report) == []
        for record in report.trace:
            assert record.level == 1
            assert record.model_kind is ModelKind.TAYLOR
            assert record.recursive_flops == 0

    def test_iterates_recorded_on_request(self, quartic):
        cfg = SolverConfig(record_iterates=True)
        report = arq_minimize(quartic, np.zeros(8), cfg)

        successes = sum(r.successful for r in report.trace)
        assert len(report.iterates) == successes + 1
        np.testing.assert_allclose(report.iterates[-1], report.x_final)

    def test_iteration_cap_is_a_fail(self, quartic):
        report = arq_minimize(quartic, np.full(8, 3.0), SolverConfig(max_outer_iters=2))

        assert report.status is RunStatus.MAX_ITERATIONS
        assert report.status.is_fail
        assert report.it_T == 2

    def test_wall_time_budget_is_a_fail(self, quartic):
        report = arq_minimize(quartic, np.full(8, 3.0), SolverConfig(max_wall_time=1e-9))

        assert report.status is RunStatus.TIME_BUDGET
        assert report.it_T == 0

    def test_failed_subproblems_are_charged_and_rejected(self, spd_quadratic):
        oracle, _ = spd_quadratic
        cfg = SolverConfig(max_secular_iters=1, max_outer_iters=5)
        report = arq_minimize(oracle, np.ones(4), cfg)

        assert report.status is RunStatus.MAX_ITERATIONS
        assert not any(r.successful for r in report.trace)
        assert all(math.isnan(r.rho) for r in report.trace)
        assert report.total_factorizations == 5
        assert report.total_flops > 0
        assert check_flop_conservation(report)
        lambdas = [r.lam for r in report.trace]
        assert lambdas == pytest.approx([cfg.lambda0 * cfg.gamma3**k for k in range(5)])

    def test_overflowing_trial_point_is_rejected(self):
        def eval_f(x):
            if abs(x[0]) > 5.0:
                raise ObjectiveOverflowError(abs(x[0]), 5.0)
            return float((x[0] - 1.0) ** 2)

        oracle = ObjectiveOracle(dim=1, eval_f=eval_f, eval_grad=lambda x: 2.0 * (x - 1.0))
        report = arq_minimize(oracle, np.zeros(1), q=1)

        assert report.converged
        assert not report.trace[0].successful
        assert math.isnan(report.trace[0].rho)
        assert report.x_final[0] == pytest.approx(1.0, abs=1e-7)

    def test_second_order_needs_hessians(self):
        oracle = ObjectiveOracle(dim=2, eval_f=lambda x: float(x @ x), eval_grad=lambda x: 2 * x)
        with pytest.raises(InvalidArgumentError):
            arq_minimize(oracle, np.zeros(2), q=2)

    def test_starting_point_dimension_checked(self, spd_quadratic):
        oracle, _ = spd_quadratic
        with pytest.raises(InvalidArgumentError):
            arq_minimize(oracle, np.zeros(3))


class TestMultilevel:
    @pytest.mark.parametrize(("q", "n1d"), [(1, 4), (2, 8)])
    def test_grid_run_converges_with_coarse_steps(self, q, n1d):
        hierarchy = build_hierarchy(n1d, 2)
        x0 = random_init(hierarchy.top.dim, 1.0, seed=0)
        report = marq_minimize(hierarchy, x0, q=q, seed=0)

        assert report.converged
        assert report.method == METHOD_MARQ
        assert report.levels == 2
        assert np.linalg.norm(hierarchy.top.oracle.grad(report.x_final)) <= 1e-7
        assert report.it_f < report.it_T
        assert report.inner_trace
        assert all(r.level == 1 for r in report.inner_trace)
        assert descent_violations(report) == []
        assert model_decrease_violations(report, q) == []

    def test_flops_are_conserved_across_levels(self, three_level_hierarchy):
        x0 = random_init(three_level_hierarchy.top.dim, 1.0, seed=1)
        solver = MultilevelSolver(three_level_hierarchy, q=2)
        report = solver.minimize(x0, seed=1)

        assert len(report.per_level_flops) == 3
        assert all(flops > 0 for flops in report.per_level_flops)
        assert check_flop_conservation(report, shadow_flops=solver.counter.flops)
        for record in report.trace:
            if record.model_kind is ModelKind.TAYLOR:
                assert record.recursive_flops == 0

    def test_alternate_policy_never_descends_twice_in_a_row(self, small_hierarchy):
        x0 = random_init(small_hierarchy.top.dim, 1.0, seed=2)
        cfg = SolverConfig(descend_policy="alternate")
        report = marq_minimize(small_hierarchy, x0, cfg)

        kinds = [r.model_kind for r in report.trace]
        for previous, current in zip(kinds, kinds[1:]):
            assert not (previous is ModelKind.COARSE and current is ModelKind.COARSE)
        assert report.converged

    def test_fixed_recursion_limits_coarse_successes(self, small_hierarchy):
        x0 = random_init(small_hierarchy.top.dim, 1.0, seed=3)
        cfg = SolverConfig(recursion_policy="fixed", max_successful=1)
        report = marq_minimize(small_hierarchy, x0, cfg)

        successes: dict[int, int] = {}
        for record in report.inner_trace:
            parent = record.parent_iteration
            successes[parent] = successes.get(parent, 0) + int(record.successful)
        assert successes
        assert max(successes.values()) <= 1
        assert report.converged

    def test_coarse_runs_are_capped(self, small_hierarchy):
        x0 = random_init(small_hierarchy.top.dim, 1.0, seed=4)
        cfg = SolverConfig(max_coarse_iters=2)
        report = marq_minimize(small_hierarchy, x0, cfg)

        counts: dict[int, int] = {}
        for record in report.inner_trace:
            counts[record.parent_iteration] = counts.get(record.parent_iteration, 0) + 1
        assert max(counts.values()) <= 2

    @pytest.mark.parametrize("q", [1, 2])
    def test_identity_hierarchy_retraces_one_level_runs(self, q):
        oracle = convex_quartic(50, seed=1)
        x0 = np.random.default_rng(1).standard_normal(50)
        cfg = SolverConfig(record_iterates=True)
        report = marq_minimize(identity_hierarchy(oracle, 2), x0, cfg, q)

        deviation, compared = identity_collapse_deviation(oracle, report, cfg, q)
        assert report.converged
        assert compared == len(report.inner_runs) >= 1
        assert deviation <= 1e-8
        for run in report.inner_runs:
            assert run.level == 1
            assert run.lam0 == report.trace[run.parent_iteration].lam
            assert report.trace[run.parent_iteration].model_kind is ModelKind.COARSE

    def test_stalled_coarse_model_falls_back_to_taylor(self, quartic):
        # Every pred sits below the floor, so no iteration is ever successful.
        cfg = SolverConfig(pred_floor_rel=1e6, max_outer_iters=4, max_coarse_iters=3)
        report = marq_minimize(identity_hierarchy(quartic, 2), np.full(8, 0.5), cfg)

        assert report.status is RunStatus.MAX_ITERATIONS
        kinds = [r.model_kind for r in report.trace]
        assert kinds == [ModelKind.COARSE, ModelKind.TAYLOR, ModelKind.COARSE, ModelKind.TAYLOR]

    def test_audit_mode_records_coherence(self, small_hierarchy):
        x0 = random_init(small_hierarchy.top.dim, 1.0, seed=0)
        report = marq_minimize(small_hierarchy, x0, SolverConfig(audit=True))

        assert report.coherence_checks
        assert {c["check"] for c in report.coherence_checks} == {"first_order", "second_order"}
        assert all(c["passed"] for c in report.coherence_checks)
