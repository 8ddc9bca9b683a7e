"""Console tables for runs, comparisons and audits"""

from __future__ import annotations

from rich.console import Console
from rich.table import Table

from marq.constants import RUN_COLUMNS, TRACE_COLUMNS
from marq.formatters import format_flops, format_mean, format_save, format_scalar
from marq.models.report import ComparisonSummary, IterationRecord, RunReport, RunStats
from marq.utils.logging import get_logger

logger = get_logger(__name__)

# Trace columns shown on the console; the CSV has all of them.
CONSOLE_TRACE_KEYS = [
    "level",
    "iterate_index",
    "model_kind",
    "rho",
    "lambda",
    "step_norm",
    "f_value",
    "grad_norm",
    "successful",
    "flops_this_iter",
    "recursive_flops",
]


class DisplayService:
    def __init__(self, console: Console | None = None, verbose: bool = False):
        self.console = console or Console()
        self.verbose = verbose

    def display_config(self, config: dict) -> None:
        """Print every constant used by the run."""
        table = Table(title="Configuration", show_header=True)
        table.add_column("Parameter")
        table.add_column("Value", justify="right")
        for key, value in sorted(config.items()):
            table.add_row(key, str(value))
        self.console.print(table)

    def _trace_row(self, record: IterationRecord) -> list[str]:
        values = record.to_dict()
        row = []
        for key in CONSOLE_TRACE_KEYS:
            value = values[key]
            if key in ("flops_this_iter", "recursive_flops"):
                row.append(format_flops(value))
            elif key == "successful":
                row.append("✓" if value else "✗")
            elif isinstance(value, float):
                row.append(format_scalar(value))
            else:
                row.append(str(value))
        return row

    def display_trace(self, report: RunReport) -> None:
        table = Table(title=f"{report.method.upper()} trace")
        labels = {col.key: col.label for col in TRACE_COLUMNS}
        for key in CONSOLE_TRACE_KEYS:
            table.add_column(labels[key], justify="right")
        for record in report.trace:
            table.add_row(*self._trace_row(record), style=None if record.successful else "yellow")
        self.console.print(table)

    def display_report(self, report: RunReport, show_trace: bool = False) -> None:
        """Print a run summary, optionally preceded by its trace."""
        if show_trace or self.verbose:
            self.display_trace(report)
        status_style = "red" if report.status.is_fail else "green"
        self.console.print(
            f"[{status_style}]{report.status.value}[/{status_style}] "
            f"{report.method} q={report.q} levels={report.levels}: "
            f"it_T={report.it_T} it_f={report.it_f} "
            f"||grad f||={format_scalar(report.grad_norm_final)} "
            f"flops={format_flops(report.total_flops)}"
            + (f" rmse={format_scalar(report.rmse_final)}" if report.rmse_final is not None else "")
        )
        if report.levels > 1:
            per_level = ", ".join(
                f"L{index}: {format_flops(flops)}"
                for index, flops in reversed(list(enumerate(report.per_level_flops, start=1)))
            )
            self.console.print(f"  flops per level: {per_level}")

    def display_runs(self, reports: list[RunReport]) -> None:
        table = Table(title="Runs")
        for col in RUN_COLUMNS:
            table.add_column(col.label, justify="right")
        for report in reports:
            table.add_row(
                str(report.seed),
                report.method,
                report.status.value,
                str(report.it_T),
                str(report.it_f),
                format_scalar(report.rmse_final),
                format_flops(report.total_flops),
                f"{report.wall_time:.2f}",
                style="red" if report.status.is_fail else None,
            )
        self.console.print(table)

    def _stats_row(self, label: str, stats: RunStats) -> list[str]:
        iterations = f"{format_mean(stats.it_T)}/{format_mean(stats.it_f)}"
        return [
            label,
            iterations,
            format_scalar(stats.rmse),
            format_flops(stats.total_flops),
            f"{stats.failures}/{stats.runs}",
        ]

    def display_summary(self, summary: ComparisonSummary) -> None:
        """One-level versus multilevel table with the save triple."""
        table = Table(title="Comparison")
        for label in ("Method", "it_T/it_f", "RMSE", "Mean flops", "FAIL"):
            table.add_column(label, justify="right")
        table.add_row(*self._stats_row("AR", summary.arc_stats))
        table.add_row(*self._stats_row("MAR", summary.marc_stats))
        self.console.print(table)
        self.console.print(
            f"save (min-avg-max over {summary.pairs_compared} pairs): "
            f"{format_save(summary.save_min, summary.save_avg, summary.save_max)}"
        )

    def display_audit(self, checks) -> None:
        table = Table(title="Audit")
        for label in ("Check", "Value", "Bound", "Margin", "Result"):
            table.add_column(label, justify="right")
        for check in checks:
            table.add_row(
                check.name,
                format_scalar(check.value),
                format_scalar(check.bound),
                format_scalar(check.margin),
                "[green]PASS[/green]" if check.passed else "[red]FAIL[/red]",
            )
        self.console.print(table)
        failed = [c.name for c in checks if not c.passed]
        if failed:
            self.console.print(f"[red]{len(failed)} check(s) failed: {', '.join(failed)}[/red]")
        else:
            self.console.print(f"[green]All {len(checks)} checks passed[/green]")
