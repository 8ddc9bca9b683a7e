"""Adaptive regularization of order q, one-level and recursive multilevel"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from marq.config import SolverConfig
from marq.constants import METHOD_ARQ, METHOD_MARQ
from marq.exceptions import STEP_ERRORS, CoherenceError, InvalidArgumentError, SubproblemError
from marq.models.oracle import Matrix, ObjectiveOracle, Vector
from marq.models.regularized import check_order
from marq.models.report import InnerRun, IterationRecord, ModelKind, RunReport, RunStatus
from marq.models.transfer import LevelHierarchy, TransferPair
from marq.services.factorization import FlopCounter
from marq.services.multilevel import (
    CoarseModel,
    build_coarse_model,
    coherence_residuals,
    should_descend,
)
from marq.services.subproblem import solve_q1, solve_q2
from marq.utils.logging import get_logger

logger = get_logger(__name__)


def compute_rho(ared: float, pred: float, pred_floor: float) -> float | None:
    """Return ared/pred, or None when pred is too small to divide by (unsuccessful)."""
    if pred <= pred_floor:
        return None
    return ared / pred


def update_lambda(rho: float | None, lam: float, cfg: SolverConfig) -> float:
    """Regularization update: shrink after (very) successful steps, grow otherwise."""
    if rho is not None and rho >= cfg.eta2:
        return max(cfg.lambda_min, cfg.gamma2 * lam)
    if rho is not None and rho >= cfg.eta1:
        return max(cfg.lambda_min, cfg.gamma1 * lam)
    return cfg.gamma3 * lam


@dataclass
class _Step:
    """A trial step and the model decrease it promises."""

    kind: ModelKind
    step: Vector | None = None
    pred: float = 0.0
    own_flops: int = 0
    recursive_flops: int = 0
    coarse_step_norm: float | None = None


@dataclass
class _LevelOutcome:
    x: Vector
    f_initial: float
    f_final: float
    grad_norm: float
    lam: float
    status: RunStatus
    trace: list[IterationRecord] = field(default_factory=list)


class MultilevelSolver:
    """Minimizes the top-level objective of a hierarchy.

    With a single level this is AR q; with more it is MAR q, where an
    iteration may instead minimize a corrected lower-level model and
    prolongate the result.
    """

    def __init__(
        self,
        hierarchy: LevelHierarchy,
        config: SolverConfig | None = None,
        q: int = 2,
        method: str = METHOD_MARQ,
    ):
        check_order(q)
        self.hierarchy = hierarchy
        self.config = config or SolverConfig()
        self.q = q
        self.method = method
        if q == 2 and not all(level.oracle.has_hessian for level in hierarchy.levels):
            raise InvalidArgumentError("order-2 methods need a Hessian on every level")
        self._reset()

    def _reset(self) -> None:
        depth = self.hierarchy.depth
        self.counter = FlopCounter()
        self._flops = [0] * depth
        self._dense_flops = [0] * depth
        self._factorizations = [0] * depth
        self._iterations = [0] * depth
        self._inner_trace: list[IterationRecord] = []
        self._coherence: list[dict] = []
        self._iterates: list[Vector] = []
        self._inner_runs: list[InnerRun] = []
        self._deadline = math.inf
        self._timed_out = False

    def _charge(self, level: int, factorizations: int, flops: int, dense_flops: int) -> None:
        self._factorizations[level - 1] += factorizations
        self._flops[level - 1] += flops
        self._dense_flops[level - 1] += dense_flops

    def _flops_below(self, level: int) -> int:
        return sum(self._flops[: level - 1])

    def minimize(
        self, x0: Vector, seed: int | None = None, lam0: float | None = None
    ) -> RunReport:
        """Run from x0 until the top-level gradient tolerance, iteration cap or time budget.

        ``lam0`` overrides ``config.lambda0`` to restart from a known (x, lambda).
        """
        if lam0 is not None and not lam0 > 0.0:
            raise InvalidArgumentError(f"initial lambda must be positive, got {lam0}")
        self._reset()
        top = self.hierarchy.top
        x0 = np.asarray(x0, dtype=float)
        top.oracle.check_point(x0)

        start = time.perf_counter()
        self._deadline = start + self.config.max_wall_time
        outcome = self._run_level(
            level=top.index,
            oracle=top.oracle,
            x0=x0,
            lam0=self.config.lambda0 if lam0 is None else lam0,
            top_iteration=None,
        )
        wall_time = time.perf_counter() - start

        report = RunReport(
            status=outcome.status,
            method=self.method,
            q=self.q,
            levels=self.hierarchy.depth,
            x_final=outcome.x,
            f_initial=outcome.f_initial,
            f_final=outcome.f_final,
            grad_norm_final=outcome.grad_norm,
            lambda_final=outcome.lam,
            trace=outcome.trace,
            inner_trace=self._inner_trace,
            per_level_flops=list(self._flops),
            per_level_dense_flops=list(self._dense_flops),
            per_level_factorizations=list(self._factorizations),
            per_level_iterations=list(self._iterations),
            wall_time=wall_time,
            seed=seed,
            coherence_checks=self._coherence,
            iterates=self._iterates,
            inner_runs=self._inner_runs,
            config=self.config.to_dict(),
        )
        log = logger.warning if report.status.is_fail else logger.info
        log(report.summary())
        return report

    def _stop_status(self, level: int, k: int, successes: int, grad_norm: float) -> RunStatus | None:
        cfg = self.config
        if grad_norm <= cfg.eps_for(level):
            return RunStatus.CONVERGED
        if time.perf_counter() > self._deadline:
            if not self._timed_out:
                logger.warning(f"wall-time budget of {cfg.max_wall_time:g}s exhausted")
            self._timed_out = True
            return RunStatus.TIME_BUDGET
        if level == self.hierarchy.depth:
            return RunStatus.MAX_ITERATIONS if k >= cfg.max_outer_iters else None
        if cfg.recursion_policy == "fixed" and successes >= cfg.max_successful:
            return RunStatus.CONVERGED
        return RunStatus.MAX_ITERATIONS if k >= cfg.max_coarse_iters else None

    def _run_level(
        self,
        level: int,
        oracle: ObjectiveOracle,
        x0: Vector,
        lam0: float,
        top_iteration: int | None,
    ) -> _LevelOutcome:
        cfg = self.config
        is_top = level == self.hierarchy.depth
        x = x0.copy()
        f = oracle.f(x)
        g = oracle.grad(x)
        grad_norm = float(np.linalg.norm(g))
        f_initial = f
        lam = lam0
        trace: list[IterationRecord] = []
        successes = 0
        descended_last = False
        coarse_stalled = False
        k = 0
        iterates = [x.copy()] if cfg.record_iterates else None

        while (status := self._stop_status(level, k, successes, grad_norm)) is None:
            B = oracle.hess(x) if self.q == 2 else None
            parent = k if is_top else top_iteration

            descend = False
            restricted_norm = None
            if level > 1:
                pair = self.hierarchy.level(level).transfer
                restricted_norm = float(np.linalg.norm(pair.restrict(g)))
                allowed = should_descend(g, pair.R, cfg.kappa_H, cfg.eps_for(level - 1))
                # One Taylor step after a coarse step whose rho was undefined.
                descend = (
                    allowed
                    and not coarse_stalled
                    and (cfg.descend_policy == "always" or not descended_last)
                )
            descended_last = descend

            trial = _Step(kind=ModelKind.COARSE if descend else ModelKind.TAYLOR)
            f_trial = math.nan
            try:
                if descend:
                    self._recursive_step(trial, level, x, g, B, lam, parent)
                else:
                    self._taylor_step(trial, level, g, B, lam)
                if trial.step is not None:
                    f_trial = oracle.f(x + trial.step)
            except STEP_ERRORS as e:
                if isinstance(e, SubproblemError):
                    self._charge(level, e.factorizations, e.flops, e.dense_flops)
                    trial.own_flops += e.flops
                logger.warning(f"level {level} iteration {k}: {e}")
                trial.step = None

            rho = None
            ared = 0.0
            if trial.step is not None:
                ared = f - f_trial
                rho = compute_rho(ared, trial.pred, cfg.pred_floor(f))
            successful = rho is not None and rho >= cfg.eta1
            coarse_stalled = trial.kind is ModelKind.COARSE and rho is None
            lam_used = lam
            lam = update_lambda(rho, lam, cfg)

            if successful:
                x = x + trial.step
                f = f_trial
                g = oracle.grad(x)
                grad_norm = float(np.linalg.norm(g))
                successes += 1
                if iterates is not None:
                    iterates.append(x.copy())

            record = IterationRecord(
                level=level,
                iterate_index=k,
                model_kind=trial.kind,
                rho=math.nan if rho is None else rho,
                lam=lam_used,
                step_norm=0.0 if trial.step is None else float(np.linalg.norm(trial.step)),
                f_value=f,
                grad_norm=grad_norm,
                successful=successful,
                flops_this_iter=trial.own_flops,
                recursive_flops=trial.recursive_flops,
                pred=trial.pred,
                ared=ared,
                parent_iteration=None if is_top else top_iteration,
                coarse_step_norm=trial.coarse_step_norm,
                restricted_grad_norm=restricted_norm,
            )
            (trace if is_top else self._inner_trace).append(record)
            self._iterations[level - 1] += 1
            logger.debug(
                f"L{level} k={k} {trial.kind.value:6s} rho={record.rho:.3e} lambda={lam_used:.3e} "
                f"||s||={record.step_norm:.3e} f={f:.10e} ||g||={grad_norm:.3e}"
            )
            k += 1

        if iterates is not None:
            if is_top:
                self._iterates = iterates
            else:
                run = InnerRun(
                    level=level, parent_iteration=top_iteration, lam0=lam0, iterates=iterates
                )
                self._inner_runs.append(run)

        return _LevelOutcome(
            x=x,
            f_initial=f_initial,
            f_final=f,
            grad_norm=grad_norm,
            lam=lam,
            status=status,
            trace=trace,
        )

    def _taylor_step(self, trial: _Step, level: int, g: Vector, B: Matrix | None, lam: float):
        cfg = self.config
        if self.q == 1:
            result = solve_q1(g, lam)
        else:
            result = solve_q2(
                g,
                B,
                lam,
                cfg.theta,
                secular_tol=cfg.secular_tol,
                max_iters=cfg.max_secular_iters,
                counter=self.counter,
            )
        self._charge(level, result.factorizations, result.flops, result.dense_flops)
        trial.own_flops = result.flops
        trial.step = result.step
        trial.pred = result.model_decrease

    def _recursive_step(
        self,
        trial: _Step,
        level: int,
        x: Vector,
        g: Vector,
        B: Matrix | None,
        lam: float,
        top_iteration: int,
    ):
        pair = self.hierarchy.level(level).transfer
        lower = self.hierarchy.level(level - 1)
        cm = build_coarse_model(g, B, x, pair, lower.oracle, self.q)
        if self.config.audit:
            self._audit_coherence(cm, g, B, pair, level, top_iteration)

        flops_before = self._flops_below(level)
        try:
            outcome = self._run_level(
                level=level - 1,
                oracle=cm.as_oracle(),
                x0=cm.x0H,
                lam0=lam,
                top_iteration=top_iteration,
            )
        finally:
            trial.recursive_flops = self._flops_below(level) - flops_before

        coarse_step = outcome.x - cm.x0H
        trial.coarse_step_norm = float(np.linalg.norm(coarse_step))
        trial.step = np.asarray(pair.prolong(coarse_step), dtype=float)
        trial.pred = outcome.f_initial - outcome.f_final

    def _audit_coherence(
        self,
        cm: CoarseModel,
        g: Vector,
        B: Matrix | None,
        pair: TransferPair,
        level: int,
        top_iteration: int,
    ) -> None:
        checks = coherence_residuals(cm, g, B, pair)
        for name, (value, bound) in checks.items():
            self._coherence.append(
                {
                    "level": level,
                    "parent_iteration": top_iteration,
                    "check": name,
                    "value": value,
                    "bound": bound,
                    "passed": value <= bound,
                }
            )
            if value > bound:
                raise CoherenceError(name, value, bound)


def arq_minimize(
    oracle: ObjectiveOracle,
    x0: Vector,
    cfg: SolverConfig | None = None,
    q: int = 2,
    seed: int | None = None,
    lam0: float | None = None,
) -> RunReport:
    """One-level adaptive regularization of order q; ``lam0`` overrides the starting lambda."""
    solver = MultilevelSolver(LevelHierarchy.single(oracle), cfg, q, method=METHOD_ARQ)
    return solver.minimize(x0, seed=seed, lam0=lam0)


def marq_minimize(
    hierarchy: LevelHierarchy,
    x0: Vector,
    cfg: SolverConfig | None = None,
    q: int = 2,
    seed: int | None = None,
) -> RunReport:
    """Multilevel adaptive regularization of order q over a level hierarchy."""
    solver = MultilevelSolver(hierarchy, cfg, q, method=METHOD_MARQ)
    return solver.minimize(x0, seed=seed)
