"""Runtime sanity checks on finished runs.

These compare a run against the bounds the convergence theory predicts,
using Lipschitz constants sampled along the trajectory. They flag
implementation errors; they do not prove anything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm

from marq.config import SolverConfig
from marq.models.oracle import ObjectiveOracle, Vector
from marq.models.regularized import check_order
from marq.models.report import ModelKind, RunReport
from marq.models.transfer import TransferPair


@dataclass(frozen=True)
class BoundViolation:
    """A top-level iteration whose step violates the step/gradient bound."""

    iterate_index: int
    model_kind: ModelKind
    lhs: float
    rhs: float


def _frobenius(H) -> float:
    if sp.issparse(H):
        return float(sparse_norm(H, "fro"))
    return float(np.linalg.norm(np.asarray(H), "fro"))


def sample_lipschitz(oracle: ObjectiveOracle, iterates: list[Vector], q: int) -> float:
    """Finite-difference Lipschitz estimate of the q-th derivative between consecutive iterates.

    The Hessian differences use the Frobenius norm, an upper bound on the
    spectral one. Returns 0.0 when fewer than two distinct iterates exist.
    """
    check_order(q)
    estimate = 0.0
    previous = None
    for x in iterates:
        derivative = oracle.grad(x) if q == 1 else oracle.hess(x)
        if previous is not None:
            x_prev, d_prev = previous
            distance = float(np.linalg.norm(x - x_prev))
            if distance > 0.0:
                if q == 1:
                    change = float(np.linalg.norm(derivative - d_prev))
                else:
                    change = _frobenius(derivative - d_prev)
                estimate = max(estimate, change / distance)
        previous = (x, derivative)
    return estimate


def lambda_ceiling(
    L_estimate: float,
    cfg: SolverConfig,
    q: int,
    kappa_R: float | None = None,
    L_coarse: float | None = None,
) -> float:
    """Largest lambda the update rule can reach: gamma3 * K / (1 - eta1), at least lambda0.

    K = (q+1) L / q for Taylor steps; with a transfer bound kappa_R the
    lower-level constant (q+1)(L_H + L kappa_R^{q+1}) / q is also covered.
    """
    K = (q + 1) * L_estimate / q
    if kappa_R is not None:
        L_H = L_estimate if L_coarse is None else L_coarse
        K = max(K, (q + 1) * (L_H + L_estimate * kappa_R ** (q + 1)) / q)
    return max(cfg.lambda0, cfg.gamma3 * K / (1.0 - cfg.eta1))


def lambda_ceiling_check(
    report: RunReport,
    L_estimate: float,
    cfg: SolverConfig,
    q: int,
    slack: float = 10.0,
    kappa_R: float | None = None,
) -> bool:
    """True iff every top-level lambda stays below the ceiling computed from slack * L."""
    ceiling = lambda_ceiling(slack * L_estimate, cfg, q, kappa_R=kappa_R)
    lambdas = [r.lam for r in report.trace] + [report.lambda_final]
    return max(lambdas) <= ceiling


def step_bound_violations(
    report: RunReport,
    L_estimate: float,
    cfg: SolverConfig,
    q: int,
    slack: float = 10.0,
    transfer: TransferPair | None = None,
    oracle: ObjectiveOracle | None = None,
) -> list[BoundViolation]:
    """Successful top-level iterations whose new gradient is too large for their step.

    Taylor steps must satisfy ||grad f(x+s)|| <= (L + theta + lambda) ||s||^q.
    Coarse steps are checked through ||R grad f(x+s)|| <= (kappa_R^2 L + L +
    theta + lambda_max) ||s_H||^q, which needs the recorded iterates, the
    top-level transfer and the objective; without them they are skipped.
    """
    L = slack * L_estimate
    violations = []
    successful = [r for r in report.trace if r.successful]
    lambda_max = lambda_ceiling(L, cfg, q)
    for position, record in enumerate(successful, start=1):
        if record.model_kind is ModelKind.TAYLOR:
            lhs = record.grad_norm
            rhs = (L + cfg.theta + record.lam) * record.step_norm**q
        else:
            if transfer is None or oracle is None or position >= len(report.iterates):
                continue
            lhs = float(np.linalg.norm(transfer.restrict(oracle.grad(report.iterates[position]))))
            bound = transfer.r_norm**2 * L + L + cfg.theta + lambda_max
            rhs = bound * (record.coarse_step_norm or 0.0) ** q
        if lhs > rhs:
            violations.append(BoundViolation(record.iterate_index, record.model_kind, lhs, rhs))
    return violations


def descent_violations(report: RunReport) -> list[int]:
    """Iteration indices where f failed to decrease strictly on success or rose at all."""
    bad = []
    f_prev = report.f_initial
    for record in report.trace:
        if record.successful and not record.f_value < f_prev:
            bad.append(record.iterate_index)
        elif not record.successful and record.f_value != f_prev:
            bad.append(record.iterate_index)
        f_prev = record.f_value
    return bad


def model_decrease_violations(report: RunReport, q: int, rtol: float = 1e-6) -> list[tuple[int, int]]:
    """Accepted Taylor steps, on any level, with pred < lambda/(q+1) ||s||^(q+1).

    Any step no worse than s = 0 on the regularized model satisfies the bound,
    so a violation means the subproblem solver returned a bad step. Returns
    (level, iterate_index) pairs.
    """
    check_order(q)
    bad = []
    for record in [*report.trace, *report.inner_trace]:
        if not record.successful or record.model_kind is not ModelKind.TAYLOR:
            continue
        bound = record.lam / (q + 1) * record.step_norm ** (q + 1)
        if record.pred < (1.0 - rtol) * bound:
            bad.append((record.level, record.iterate_index))
    return bad
