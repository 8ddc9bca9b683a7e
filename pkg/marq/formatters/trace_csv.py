"""CSV writers for iteration traces and run tables"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from marq.constants import RUN_COLUMNS, TRACE_COLUMNS, ColumnDefinition
from marq.models.report import IterationRecord, RunReport


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float) and not math.isfinite(value):
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _write(path: Path, columns: list[ColumnDefinition], rows: Iterable[dict[str, Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fieldnames = [col.key for col in columns]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row.get(key)) for key in fieldnames})
    return path


def write_trace_csv(records: Iterable[IterationRecord], path: str | Path) -> Path:
    """One row per iteration record, columns in TRACE_COLUMNS order."""
    return _write(Path(path), TRACE_COLUMNS, (r.to_dict() for r in records))


def write_runs_csv(reports: Iterable[RunReport], path: str | Path) -> Path:
    """One row per run, columns in RUN_COLUMNS order."""
    from marq.formatters.json_output import run_row

    return _write(Path(path), RUN_COLUMNS, (run_row(r) for r in reports))
