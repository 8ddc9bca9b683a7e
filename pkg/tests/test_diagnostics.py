"""Tests for post-run diagnostics."""

import dataclasses

import numpy as np
import pytest

from marq.config import SolverConfig
from marq.core.diagnostics import (
    descent_violations,
    lambda_ceiling,
    lambda_ceiling_check,
    model_decrease_violations,
    sample_lipschitz,
    step_bound_violations,
)
from marq.core.solver import arq_minimize, marq_minimize
from marq.models.report import IterationRecord, ModelKind, RunReport, RunStatus
from marq.problems.analytic import quadratic
from marq.problems.grid import random_init


def _record(k, f, successful, lam=1.0):
    return IterationRecord(
        level=1,
        iterate_index=k,
        model_kind=ModelKind.TAYLOR,
        rho=0.5,
        lam=lam,
        step_norm=0.1,
        f_value=f,
        grad_norm=1.0,
        successful=successful,
    )


def _report(records, f_initial=10.0):
    return RunReport(
        status=RunStatus.CONVERGED,
        method="arq",
        q=2,
        levels=1,
        x_final=np.zeros(1),
        f_initial=f_initial,
        f_final=records[-1].f_value,
        grad_norm_final=0.0,
        lambda_final=records[-1].lam,
        trace=records,
    )


def test_sample_lipschitz_of_quadratic_gradient_is_curvature():
    oracle = quadratic(np.diag([2.0, 2.0]))
    iterates = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([1.0, 3.0])]
    assert sample_lipschitz(oracle, iterates, q=1) == pytest.approx(2.0)


def test_sample_lipschitz_of_quadratic_hessian_is_zero():
    oracle = quadratic(np.diag([2.0, 5.0]))
    iterates = [np.zeros(2), np.ones(2)]
    assert sample_lipschitz(oracle, iterates, q=2) == 0.0


def test_sample_lipschitz_needs_two_distinct_points():
    oracle = quadratic(np.eye(2))
    assert sample_lipschitz(oracle, [np.zeros(2)], q=1) == 0.0
    assert sample_lipschitz(oracle, [np.zeros(2), np.zeros(2)], q=1) == 0.0


def test_lambda_ceiling_formula():
    cfg = SolverConfig()
    # gamma3 * (q+1) L / q / (1 - eta1) = 2 * 3 / 0.9 for q=2, L=2
    assert lambda_ceiling(2.0, cfg, q=2) == pytest.approx(2.0 * 3.0 / 0.9)
    assert lambda_ceiling(0.0, cfg, q=2) == cfg.lambda0


def test_lambda_ceiling_with_transfer_is_larger():
    cfg = SolverConfig()
    assert lambda_ceiling(1.0, cfg, q=2, kappa_R=1.0) > lambda_ceiling(1.0, cfg, q=2)


def test_lambda_ceiling_check_flags_runaway_lambda():
    cfg = SolverConfig()
    report = _report([_record(0, 9.0, True, lam=1e6)])
    assert not lambda_ceiling_check(report, 1.0, cfg, q=2)
    assert lambda_ceiling_check(_report([_record(0, 9.0, True, lam=1.0)]), 1.0, cfg, q=2)


def test_descent_violations_on_clean_trace():
    report = _report([_record(0, 9.0, True), _record(1, 9.0, False), _record(2, 8.0, True)])
    assert descent_violations(report) == []


def test_descent_violations_catch_increase_and_drift():
    report = _report(
        [
            _record(0, 11.0, True),  # "successful" but f went up
            _record(1, 10.5, False),  # rejected yet f changed
        ]
    )
    assert descent_violations(report) == [0, 1]


def test_real_runs_respect_step_bounds_and_ceiling(small_hierarchy):
    cfg = SolverConfig(record_iterates=True)
    top = small_hierarchy.top
    x0 = random_init(top.dim, 1.0, seed=0)

    for report in (
        arq_minimize(top.oracle, x0, cfg),
        marq_minimize(small_hierarchy, x0, cfg),
    ):
        L = sample_lipschitz(top.oracle, report.iterates, q=2)
        assert L > 0.0
        assert lambda_ceiling_check(report, L, cfg, q=2)
        assert step_bound_violations(report, L, cfg, q=2, transfer=top.transfer, oracle=top.oracle) == []


def test_model_decrease_below_cubic_term_is_flagged():
    # lambda/3 ||s||^3 = 1/3000 with lam = 1, ||s|| = 0.1
    good = dataclasses.replace(_record(0, 9.0, True), pred=1e-3)
    bad = dataclasses.replace(_record(1, 8.0, True), pred=1e-4)
    rejected = dataclasses.replace(_record(2, 8.0, False), pred=0.0)
    report = _report([good, bad, rejected])

    assert model_decrease_violations(report, q=2) == [(1, 1)]
    # q = 1 bound is lambda/2 ||s||^2 = 5e-3
    assert model_decrease_violations(report, q=1) == [(1, 0), (1, 1)]


def test_coarse_steps_are_exempt_from_model_decrease_bound():
    coarse = dataclasses.replace(_record(0, 9.0, True), model_kind=ModelKind.COARSE, pred=0.0)
    assert model_decrease_violations(_report([coarse]), q=2) == []
