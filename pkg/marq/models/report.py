"""Run report models and related enums"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np


class ModelKind(Enum):
    """Which model produced an iteration's step."""

    TAYLOR = "taylor"
    COARSE = "coarse"


class RunStatus(Enum):
    """Outcome of a minimization run."""

    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    TIME_BUDGET = "time_budget"

    @property
    def is_fail(self) -> bool:
        return self is not RunStatus.CONVERGED


@dataclass(frozen=True)
class IterationRecord:
    """One iteration of the driver at some level.

    ``f_value`` and ``grad_norm`` are taken at the iterate after the
    iteration (unchanged on an unsuccessful one). ``flops_this_iter`` counts
    factorizations performed at this record's own level; ``recursive_flops``
    counts those performed by the lower-level call the iteration spawned.
    """

    level: int
    iterate_index: int
    model_kind: ModelKind
    rho: float
    lam: float
    step_norm: float
    f_value: float
    grad_norm: float
    successful: bool
    flops_this_iter: int = 0
    recursive_flops: int = 0
    pred: float = 0.0
    ared: float = 0.0
    parent_iteration: int | None = None
    coarse_step_norm: float | None = None
    restricted_grad_norm: float | None = None

    @property
    def total_flops(self) -> int:
        return self.flops_this_iter + self.recursive_flops

    def to_dict(self) -> dict[str, Any]:
        return {
            "level": self.level,
            "iterate_index": self.iterate_index,
            "parent_iteration": self.parent_iteration,
            "model_kind": self.model_kind.value,
            "rho": self.rho,
            "lambda": self.lam,
            "step_norm": self.step_norm,
            "f_value": self.f_value,
            "grad_norm": self.grad_norm,
            "successful": self.successful,
            "flops_this_iter": self.flops_this_iter,
            "recursive_flops": self.recursive_flops,
            "pred": self.pred,
            "ared": self.ared,
            "coarse_step_norm": self.coarse_step_norm,
            "restricted_grad_norm": self.restricted_grad_norm,
        }


@dataclass(frozen=True)
class InnerRun:
    """Accepted iterates of one lower-level run, recorded with ``record_iterates``.

    ``iterates[0]`` is the restricted starting point and ``lam0`` the lambda
    inherited from the parent iteration.
    """

    level: int
    parent_iteration: int | None
    lam0: float
    iterates: list[np.ndarray]


@dataclass
class RunReport:
    """Everything a single AR q / MAR q run produced."""

    status: RunStatus
    method: str
    q: int
    levels: int
    x_final: np.ndarray
    f_initial: float
    f_final: float
    grad_norm_final: float
    lambda_final: float
    trace: list[IterationRecord] = field(default_factory=list)
    inner_trace: list[IterationRecord] = field(default_factory=list)
    # Indexed by level - 1 (coarsest first)
    per_level_flops: list[int] = field(default_factory=list)
    per_level_dense_flops: list[int] = field(default_factory=list)
    per_level_factorizations: list[int] = field(default_factory=list)
    per_level_iterations: list[int] = field(default_factory=list)
    wall_time: float = 0.0
    seed: int | None = None
    rmse_final: float | None = None
    coherence_checks: list[dict[str, Any]] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)
    inner_runs: list[InnerRun] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status is RunStatus.CONVERGED

    @property
    def it_T(self) -> int:
        """Top-level iterations."""
        return len(self.trace)

    @property
    def it_f(self) -> int:
        """Top-level iterations that used the Taylor model."""
        return sum(1 for r in self.trace if r.model_kind is ModelKind.TAYLOR)

    @property
    def total_flops(self) -> int:
        return int(sum(self.per_level_flops))

    @property
    def total_dense_flops(self) -> int:
        return int(sum(self.per_level_dense_flops))

    @property
    def total_factorizations(self) -> int:
        return int(sum(self.per_level_factorizations))

    def summary(self) -> str:
        return (
            f"{self.method} q={self.q} levels={self.levels}: {self.status.value} "
            f"after {self.it_T} iterations ({self.it_f} Taylor), "
            f"||grad f||={self.grad_norm_final:.3e}, flops={self.total_flops}"
        )


@dataclass(frozen=True)
class RunStats:
    """Means over the converged runs of one method."""

    method: str
    runs: int
    failures: int
    it_T: float | None = None
    it_f: float | None = None
    rmse: float | None = None
    total_flops: float | None = None
    wall_time: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "runs": self.runs,
            "failures": self.failures,
            "it_T": self.it_T,
            "it_f": self.it_f,
            "rmse": self.rmse,
            "total_flops": self.total_flops,
            "wall_time": self.wall_time,
        }


@dataclass(frozen=True)
class ComparisonSummary:
    """One-level versus multilevel comparison over repetitions.

    Save statistics cover only the pairs where both runs converged; they are
    None when no such pair exists.
    """

    save_min: float | None
    save_avg: float | None
    save_max: float | None
    arc_stats: RunStats
    marc_stats: RunStats
    pairs_compared: int = 0
    saves: tuple[float, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "save_min": self.save_min,
            "save_avg": self.save_avg,
            "save_max": self.save_max,
            "pairs_compared": self.pairs_compared,
            "saves": list(self.saves),
            "arc_stats": self.arc_stats.to_dict(),
            "marc_stats": self.marc_stats.to_dict(),
        }
