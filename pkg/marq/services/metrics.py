"""Flop savings and run aggregation"""

from __future__ import annotations

import threading
from collections.abc import Iterable, Sequence

import numpy as np

from marq.exceptions import InvalidArgumentError
from marq.models.report import ComparisonSummary, RunReport, RunStats
from marq.utils.logging import get_logger

logger = get_logger(__name__)


def is_fail(report: RunReport) -> bool:
    """A run that hit its iteration cap or wall-clock budget."""
    return report.status.is_fail


def save_ratio(arc: RunReport, marc: RunReport) -> float:
    """Total one-level factorization flops over total multilevel flops (all levels)."""
    marc_flops = marc.total_flops
    if marc_flops <= 0:
        raise InvalidArgumentError("multilevel run reports no factorization flops")
    return arc.total_flops / marc_flops


def _mean(values: Iterable[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def aggregate(reports: Sequence[RunReport], method: str | None = None) -> RunStats:
    """Means of it_T, it_f, RMSE, flops and time over the converged runs.

    Raises:
        InvalidArgumentError: on an empty list
    """
    if not reports:
        raise InvalidArgumentError("cannot aggregate an empty list of reports")
    converged = [r for r in reports if not is_fail(r)]
    return RunStats(
        method=method or reports[0].method,
        runs=len(reports),
        failures=len(reports) - len(converged),
        it_T=_mean(r.it_T for r in converged),
        it_f=_mean(r.it_f for r in converged),
        rmse=_mean(r.rmse_final for r in converged),
        total_flops=_mean(r.total_flops for r in converged),
        wall_time=_mean(r.wall_time for r in converged),
    )


def compare_methods(
    arc_reports: Sequence[RunReport], marc_reports: Sequence[RunReport]
) -> ComparisonSummary:
    """Pairwise save ratios (same seed, same position) plus per-method means.

    Pairs where either run failed are left out of the save statistics.
    """
    if len(arc_reports) != len(marc_reports):
        raise InvalidArgumentError(
            f"need paired runs, got {len(arc_reports)} one-level and {len(marc_reports)} multilevel"
        )
    saves = []
    for arc, marc in zip(arc_reports, marc_reports, strict=True):
        if arc.seed != marc.seed:
            raise InvalidArgumentError(f"paired runs use different seeds: {arc.seed} vs {marc.seed}")
        if is_fail(arc) or is_fail(marc):
            logger.info(f"seed {arc.seed}: excluded from save statistics (FAIL)")
            continue
        saves.append(save_ratio(arc, marc))

    return ComparisonSummary(
        save_min=min(saves) if saves else None,
        save_avg=float(np.mean(saves)) if saves else None,
        save_max=max(saves) if saves else None,
        arc_stats=aggregate(arc_reports),
        marc_stats=aggregate(marc_reports),
        pairs_compared=len(saves),
        saves=tuple(saves),
    )


def check_flop_conservation(report: RunReport, shadow_flops: int | None = None) -> bool:
    """Per-level totals, per-iteration attribution and an optional shadow counter all agree."""
    attributed = sum(r.flops_this_iter + r.recursive_flops for r in report.trace)
    if attributed != report.total_flops:
        return False
    return shadow_flops is None or shadow_flops == report.total_flops


class ReportCollector:
    """Thread-safe accumulator for reports coming back from worker threads."""

    def __init__(self):
        self._lock = threading.Lock()
        self._reports: list[RunReport] = []

    def add(self, report: RunReport) -> None:
        with self._lock:
            self._reports.append(report)

    def reports(self, method: str | None = None) -> list[RunReport]:
        """Reports sorted by seed, optionally restricted to one method."""
        with self._lock:
            selected = [r for r in self._reports if method is None or r.method == method]
        return sorted(selected, key=lambda r: (r.seed is None, r.seed or 0))
