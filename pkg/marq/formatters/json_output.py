"""Machine-readable JSON serialization for marq.

Reports and summaries carry a schema version; field names are stable and
documented in the README. Non-finite floats are written as null.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from marq.constants import RUN_COLUMNS, TRACE_COLUMNS
from marq.models.report import ComparisonSummary, ModelKind, RunReport, RunStatus

# 1: initial layout
SCHEMA_VERSION = 1


def _finite(value: Any) -> Any:
    """Replace NaN/inf by None, recursively."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_finite(v) for v in value]
    return value


def report_to_dict(report: RunReport, include_x: bool = True) -> dict[str, Any]:
    """Full report body (the ``report`` member of report.json)."""
    body = {
        "status": report.status.value,
        "converged": report.converged,
        "method": report.method,
        "q": report.q,
        "levels": report.levels,
        "seed": report.seed,
        "it_T": report.it_T,
        "it_f": report.it_f,
        "per_level_iterations": list(report.per_level_iterations),
        "per_level_flops": list(report.per_level_flops),
        "per_level_dense_flops": list(report.per_level_dense_flops),
        "per_level_factorizations": list(report.per_level_factorizations),
        "total_flops": report.total_flops,
        "total_dense_flops": report.total_dense_flops,
        "rmse_final": report.rmse_final,
        "f_initial": report.f_initial,
        "f_final": report.f_final,
        "grad_norm_final": report.grad_norm_final,
        "lambda_final": report.lambda_final,
        "wall_time": report.wall_time,
        "trace": [r.to_dict() for r in report.trace],
        "inner_trace": [r.to_dict() for r in report.inner_trace],
    }
    if report.coherence_checks:
        body["coherence_checks"] = list(report.coherence_checks)
    if include_x:
        body["x_final"] = [float(v) for v in report.x_final]
    return _finite(body)


def solve_to_dict(report: RunReport, problem: dict[str, Any]) -> dict[str, Any]:
    """Complete report.json payload for one solve."""
    return {
        "ok": True,
        "schema_version": SCHEMA_VERSION,
        "operation": "solve",
        "problem": problem,
        "config": _finite(report.config),
        "report": report_to_dict(report),
    }


def run_row(report: RunReport) -> dict[str, Any]:
    """One row of runs.csv / the runs list of summary.json."""
    return _finite(
        {
            "seed": report.seed,
            "method": report.method,
            "status": report.status.value,
            "it_T": report.it_T,
            "it_f": report.it_f,
            "rmse": report.rmse_final,
            "total_flops": report.total_flops,
            "wall_time": report.wall_time,
        }
    )


def summary_to_dict(
    summary: ComparisonSummary,
    reports: list[RunReport],
    *,
    n1d: int,
    levels: int,
    a: float,
    reps: int,
    base_seed: int,
    q: int = 2,
    rhs: str = "discrete",
    config: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Complete summary.json payload for one reproduction."""
    return {
        "ok": True,
        "schema_version": SCHEMA_VERSION,
        "operation": "reproduce",
        "n1d": n1d,
        "levels": levels,
        "a": a,
        "q": q,
        "rhs": rhs,
        "reps": reps,
        "base_seed": base_seed,
        "config": _finite(config or {}),
        "summary": _finite(summary.to_dict()),
        "runs": [run_row(r) for r in reports],
    }


def write_json(payload: dict[str, Any], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def schema_to_dict() -> dict[str, Any]:
    """Versioned description of every output file and the commands producing them."""
    return {
        "ok": True,
        "schema_version": SCHEMA_VERSION,
        "application": "marq",
        "capabilities": {
            "commands": [
                {
                    "name": "solve",
                    "cli": "marq solve --method {arq,marq} --n1d N --levels L --a A --seed S",
                    "outputs": ["report.json", "trace.csv"],
                    "description": "Run one AR q or MAR q minimization of the PDE benchmark.",
                },
                {
                    "name": "reproduce",
                    "cli": "marq reproduce --n1d N --levels L --a A --reps R",
                    "outputs": ["summary.json", "runs.csv", "runs/<method>-<seed>.json", "marq.log"],
                    "description": "Run both methods on identical seeds and summarize flop savings.",
                },
                {
                    "name": "audit",
                    "cli": "marq audit [--q {1,2}] [--inject-fault transfer]",
                    "outputs": [],
                    "description": "Run the invariant suites on small instances.",
                },
                {
                    "name": "schema",
                    "cli": "marq schema",
                    "outputs": [],
                    "description": "Print this document.",
                },
            ],
            "exit_codes": {"0": "converged / all checks passed", "1": "usage error", "2": "FAIL"},
        },
        "report": {
            "top_level_fields": ["ok", "schema_version", "operation", "problem", "config", "report"],
            "report_fields": [
                "status",
                "converged",
                "method",
                "q",
                "levels",
                "seed",
                "it_T",
                "it_f",
                "per_level_iterations",
                "per_level_flops",
                "per_level_dense_flops",
                "per_level_factorizations",
                "total_flops",
                "total_dense_flops",
                "rmse_final",
                "f_initial",
                "f_final",
                "grad_norm_final",
                "lambda_final",
                "wall_time",
                "x_final",
                "trace",
                "inner_trace",
            ],
            "record_fields": [col.key for col in TRACE_COLUMNS],
            "status_values": [status.value for status in RunStatus],
            "model_kinds": [kind.value for kind in ModelKind],
            "per_level_order": "coarsest level first",
        },
        "summary": {
            "top_level_fields": [
                "ok",
                "schema_version",
                "operation",
                "n1d",
                "levels",
                "a",
                "q",
                "rhs",
                "reps",
                "base_seed",
                "config",
                "summary",
                "runs",
            ],
            "summary_fields": [
                "save_min",
                "save_avg",
                "save_max",
                "pairs_compared",
                "saves",
                "arc_stats",
                "marc_stats",
            ],
            "run_fields": [col.key for col in RUN_COLUMNS],
        },
    }
