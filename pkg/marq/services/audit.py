"""Invariant audit suites run on small instances.

Each check returns an AuditCheck with the measured value and the bound it
must stay under; the CLI prints them and exits nonzero on any failure.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from marq.config import SolverConfig
from marq.core.diagnostics import (
    descent_violations,
    lambda_ceiling_check,
    model_decrease_violations,
    sample_lipschitz,
)
from marq.core.solver import arq_minimize, marq_minimize
from marq.exceptions import CoherenceError, FactorizationError, InvalidArgumentError
from marq.models.oracle import ObjectiveOracle
from marq.models.regularized import RegularizedModel, regularized_grad, regularized_value
from marq.models.report import RunReport
from marq.models.transfer import Level, LevelHierarchy, TransferPair
from marq.problems.analytic import convex_quartic, identity_hierarchy
from marq.problems.grid import (
    assemble,
    build_hierarchy,
    grid_coordinates,
    laplacian_matrix,
    laplacian_u_star,
    objective_oracle,
    random_init,
    u_star_values,
)
from marq.services.factorization import factorize_shifted
from marq.services.metrics import check_flop_conservation
from marq.services.multilevel import build_coarse_model
from marq.services.subproblem import solve_q1, solve_q2, solve_q2_smallscale_oracle
from marq.utils.logging import get_logger

logger = get_logger(__name__)

FAULTS = ("transfer",)
# Coarse sweep resolution per axis and basins refined by the grid oracle.
ORACLE_COARSE_POINTS = 801
ORACLE_BASINS = 3


@dataclass(frozen=True)
class AuditCheck:
    """Result of one invariant check."""

    name: str
    value: float
    bound: float
    passed: bool
    detail: str = ""

    @property
    def margin(self) -> float:
        return self.bound - self.value

    @classmethod
    def at_most(cls, name: str, value: float, bound: float, detail: str = "") -> AuditCheck:
        return cls(
            name=name,
            value=float(value),
            bound=float(bound),
            passed=bool(value <= bound),
            detail=detail,
        )


def _corrupt(pair: TransferPair) -> TransferPair:
    """Same restriction, prolongation perturbed in one entry."""
    P = sp.lil_matrix(pair.P)
    P[0, 0] = P[0, 0] + 0.25
    return TransferPair(
        P=sp.csr_matrix(P), R=pair.R, alpha=pair.alpha, p_norm=pair.p_norm, r_norm=pair.r_norm
    )


def _with_fault(hierarchy: LevelHierarchy) -> LevelHierarchy:
    levels = [
        Level(
            index=level.index,
            oracle=level.oracle,
            transfer=_corrupt(level.transfer) if level.transfer else None,
        )
        for level in hierarchy.levels
    ]
    return LevelHierarchy(levels=tuple(levels), metadata=hierarchy.metadata)


def check_transfer(hierarchy: LevelHierarchy) -> list[AuditCheck]:
    checks = []
    for level in hierarchy.levels[1:]:
        pair = level.transfer
        checks.append(
            AuditCheck.at_most(
                f"transfer_adjointness[L{level.index}]", pair.adjointness_error(), 0.0
            )
        )
    return checks


def check_regularized_grad(q: int, seed: int = 0, samples: int = 20) -> AuditCheck:
    """Central differences of regularized_value against regularized_grad."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    step = 1e-6
    for _ in range(samples):
        n = 3
        G = rng.uniform(-1, 1, (n, n))
        m = RegularizedModel(
            base_f=float(rng.uniform(-1, 1)),
            g=rng.uniform(-1, 1, n),
            B=(G + G.T) / 2 if q == 2 else None,
            lam=float(rng.uniform(0.1, 2.0)),
            q=q,
        )
        s = rng.uniform(-1, 1, n)
        fd = np.array(
            [
                regularized_value(m, s + step * e) - regularized_value(m, s - step * e)
                for e in np.eye(n)
            ]
        )
        fd /= 2 * step
        exact = regularized_grad(m, s)
        worst = max(worst, float(np.linalg.norm(fd - exact) / max(1.0, np.linalg.norm(exact))))
    return AuditCheck.at_most("regularized_grad_fd", worst, 1e-6)


def check_grid_oracle(n1d: int = 4, seed: int = 0) -> AuditCheck:
    """Objective gradient against central differences at a random point near 0."""
    oracle = objective_oracle(assemble(n1d))
    rng = np.random.default_rng(seed)
    u = 0.1 * rng.standard_normal(oracle.dim)
    step = 1e-6
    fd = np.array(
        [(oracle.f(u + step * e) - oracle.f(u - step * e)) / (2 * step) for e in np.eye(oracle.dim)]
    )
    exact = oracle.grad(u)
    error = float(np.linalg.norm(fd - exact)) / max(1.0, float(np.linalg.norm(exact)))
    return AuditCheck.at_most("grid_gradient_fd", error, 1e-5)


def _cubic_values(points: np.ndarray, g: np.ndarray, B: np.ndarray, lam: float) -> np.ndarray:
    return (
        points @ g
        + 0.5 * np.einsum("ij,jk,ik->i", points, B, points)
        + lam / 3.0 * np.linalg.norm(points, axis=1) ** 3
    )


def grid_oracle_candidates(
    g: np.ndarray, B: np.ndarray, lam: float, grid_step: float
) -> list[tuple[np.ndarray, float]]:
    """Grid minimizers of the cubic model at resolution grid_step, best first.

    The global minimizer has norm sigma/lambda with sigma <= ||B|| + sqrt(lambda ||g||),
    so that box is swept on a coarse grid and the best few separated coarse
    points are refined with solve_q2_smallscale_oracle at grid_step.
    """
    dim = g.shape[0]
    sigma_max = float(np.linalg.norm(B, 2)) + math.sqrt(lam * float(np.linalg.norm(g)))
    radius = 1.05 * sigma_max / lam + 10.0 * grid_step
    axis = np.linspace(-radius, radius, ORACLE_COARSE_POINTS)
    coarse_step = float(axis[1] - axis[0])
    mesh = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    values = _cubic_values(mesh, g, B, lam)

    centers: list[np.ndarray] = []
    for idx in np.argsort(values):
        point = mesh[idx]
        if all(np.max(np.abs(point - c)) > 4.0 * coarse_step for c in centers):
            centers.append(point)
            if len(centers) == ORACLE_BASINS:
                break
    if coarse_step <= grid_step:
        refined = centers
    else:
        refined = [
            solve_q2_smallscale_oracle(g, B, lam, 2.0 * coarse_step, grid_step, center=c)
            for c in centers
        ]
    scored = [(p, float(_cubic_values(p[None, :], g, B, lam)[0])) for p in refined]
    return sorted(scored, key=lambda item: item[1])


def check_subproblem_oracle(
    seed: int = 0, instances: int = 100, grid_step: float = 1e-3
) -> AuditCheck:
    """Random 2-D cubic subproblems against grid search (max-norm distance in grid steps).

    Grid minimizers whose values lie within the grid's own resolution of the
    best one are equally valid references.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        g = rng.uniform(-2, 2, 2)
        G = rng.uniform(-2, 2, (2, 2))
        B = (G + G.T) / 2
        lam = float(rng.uniform(0.05, 5.0))
        step = solve_q2(g, B, lam, theta=0.0).step
        candidates = grid_oracle_candidates(g, B, lam, grid_step)
        best_value = candidates[0][1]
        curvature = float(np.linalg.norm(B, 2)) + 2.0 * lam * float(np.linalg.norm(step))
        resolution = curvature * step.shape[0] * grid_step**2
        distance = min(
            float(np.max(np.abs(step - point))) / grid_step
            for point, value in candidates
            if value <= best_value + resolution
        )
        worst = max(worst, distance)
    return AuditCheck.at_most(
        "subproblem_grid_oracle", worst, 2.0, detail=f"in grid steps over {instances} instances"
    )


def check_secular_consistency(seed: int = 0, instances: int = 20) -> AuditCheck:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        n = 5
        G = rng.standard_normal((n, n))
        lam = float(rng.uniform(0.05, 5.0))
        result = solve_q2(rng.standard_normal(n), (G + G.T) / 2, lam, 0.0)
        gap = abs(result.sigma - lam * result.step_norm)
        worst = max(worst, gap / (1.0 + result.sigma))
    return AuditCheck.at_most("secular_consistency", worst, 1e-8)


def check_hard_case() -> AuditCheck:
    """Negative curvature orthogonal to g: the step must still decrease the model."""
    g = np.array([0.0, 1.0])
    B = np.diag([-1.0, 2.0])
    result = solve_q2(g, B, 1.0, 0.5)
    m = RegularizedModel(base_f=0.0, g=g, B=B, lam=1.0, q=2)
    return AuditCheck.at_most("hard_case_decrease", regularized_value(m, result.step), -1e-12)


def check_q1_closed_form(seed: int = 0) -> AuditCheck:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(6)
    lam = 0.7
    result = solve_q1(g, lam)
    m = RegularizedModel(base_f=0.0, g=g, B=None, lam=lam, q=1)
    residual = float(np.linalg.norm(regularized_grad(m, result.step)))
    return AuditCheck.at_most("q1_closed_form_residual", residual, 1e-12)


def check_discretization_order() -> AuditCheck:
    """Truncation error of the 5-point Laplacian should drop by ~4 when h halves."""
    errors = []
    for n1d in (15, 31):
        x, y = grid_coordinates(n1d)
        discrete = laplacian_matrix(n1d) @ u_star_values(x, y)
        errors.append(float(np.max(np.abs(discrete - laplacian_u_star(x, y)))))
    ratio = errors[0] / errors[1]
    return AuditCheck(
        name="discretization_order",
        value=ratio,
        bound=5.0,
        passed=3.0 <= ratio <= 5.0,
        detail="ratio must lie in [3, 5]",
    )


def check_laplacian_spd(n1d: int = 8) -> AuditCheck:
    try:
        factorize_shifted(laplacian_matrix(n1d), 0.0)
    except FactorizationError as e:
        return AuditCheck("laplacian_spd", 1.0, 0.0, False, detail=str(e))
    return AuditCheck.at_most("laplacian_spd", 0.0, 0.0)


def identity_collapse_deviation(
    oracle: ObjectiveOracle, report: RunReport, cfg: SolverConfig, q: int
) -> tuple[float, int]:
    """Worst max-norm gap between each lower-level run and AR q replayed from its start.

    ``report`` must come from a two-level identity hierarchy over ``oracle``
    run with ``record_iterates``. Each run is replayed on its own corrected
    model from the recorded (x, lambda). Returns (deviation, runs compared).
    """
    pair = TransferPair.identity(oracle.dim)
    replay_cfg = cfg.replace(max_outer_iters=cfg.max_coarse_iters, record_iterates=True)
    worst = 0.0
    compared = 0
    for run in report.inner_runs:
        x_k = run.iterates[0]
        B = oracle.hess(x_k) if q == 2 else None
        cm = build_coarse_model(oracle.grad(x_k), B, x_k, pair, oracle, q)
        replay = arq_minimize(cm.as_oracle(), x_k, replay_cfg, q, lam0=run.lam0)
        length = min(len(run.iterates), len(replay.iterates))
        for inner_x, replay_x in zip(run.iterates[:length], replay.iterates[:length], strict=True):
            worst = max(worst, float(np.max(np.abs(inner_x - replay_x))))
        compared += 1
    return worst, compared


def check_identity_collapse(q: int, dim: int = 50, seed: int = 0) -> AuditCheck:
    """Two identical levels joined by identity transfers: every lower-level run retraces AR q."""
    oracle = convex_quartic(dim, seed)
    x0 = np.random.default_rng(seed).standard_normal(dim)
    cfg = SolverConfig(record_iterates=True)
    report = marq_minimize(identity_hierarchy(oracle, 2), x0, cfg, q)
    deviation, compared = identity_collapse_deviation(oracle, report, cfg, q)
    if compared == 0:
        return AuditCheck("identity_collapse", np.inf, 1e-8, False, detail="no lower-level runs")
    return AuditCheck.at_most(
        "identity_collapse", deviation, 1e-8, detail=f"max-norm over {compared} runs"
    )


def check_multilevel_run(
    q: int, inject_fault: str | None = None, seed: int = 0
) -> list[AuditCheck]:
    """Full MAR q run in audit mode plus post-run diagnostics."""
    n1d, levels = (16, 3) if q == 2 else (4, 2)
    hierarchy = build_hierarchy(n1d, levels)
    if inject_fault == "transfer":
        hierarchy = _with_fault(hierarchy)
    checks = check_transfer(hierarchy)

    cfg = SolverConfig(audit=True, record_iterates=True)
    x0 = random_init(hierarchy.top.dim, 1.0, seed)
    try:
        report = marq_minimize(hierarchy, x0, cfg, q, seed=seed)
    except CoherenceError as e:
        checks.append(
            AuditCheck(f"coherence_{e.check}", e.value, e.bound, False, detail="raised in run")
        )
        return checks

    names = ["first_order", "second_order"] if q == 2 else ["first_order"]
    for name in names:
        worst = max(
            (c["value"] / c["bound"] for c in report.coherence_checks if c["check"] == name),
            default=0.0,
        )
        checks.append(AuditCheck.at_most(f"coherence_{name}", worst, 1.0, "relative to bound"))

    top = hierarchy.top.oracle
    independent = float(np.linalg.norm(top.grad(report.x_final)))
    checks.append(AuditCheck.at_most("termination_gradient", independent, cfg.eps))
    checks.append(AuditCheck.at_most("descent_violations", len(descent_violations(report)), 0))
    checks.append(
        AuditCheck.at_most(
            "model_decrease_violations", len(model_decrease_violations(report, q)), 0
        )
    )
    checks.append(
        AuditCheck.at_most(
            "flop_conservation",
            0.0 if check_flop_conservation(report) else 1.0,
            0.0,
        )
    )
    L = sample_lipschitz(top, report.iterates, q)
    checks.append(
        AuditCheck(
            "lambda_ceiling",
            max(r.lam for r in report.trace) if report.trace else cfg.lambda0,
            np.nan,
            lambda_ceiling_check(report, L, cfg, q),
            detail=f"sampled L={L:.3e}",
        )
    )
    return checks


def run_audit_checks(q: int = 2, inject_fault: str | None = None) -> list[AuditCheck]:
    """Run every suite for model order q; ``inject_fault`` corrupts one component."""
    if inject_fault is not None and inject_fault not in FAULTS:
        raise InvalidArgumentError(f"unknown fault '{inject_fault}', expected one of {FAULTS}")

    suites: list[Callable[[], AuditCheck | list[AuditCheck]]] = [
        lambda: check_transfer(build_hierarchy(8, 2)),
        lambda: check_regularized_grad(q),
        check_grid_oracle,
        check_discretization_order,
        check_laplacian_spd,
        lambda: check_identity_collapse(q),
        lambda: check_multilevel_run(q, inject_fault),
    ]
    if q == 2:
        suites += [check_subproblem_oracle, check_secular_consistency, check_hard_case]
    else:
        suites.append(check_q1_closed_form)

    checks: list[AuditCheck] = []
    for suite in suites:
        result = suite()
        checks.extend(result if isinstance(result, list) else [result])
    for check in checks:
        logger.debug(
            f"audit {check.name}: value={check.value:.3e} bound={check.bound:.3e} "
            f"passed={check.passed}"
        )
    return checks
