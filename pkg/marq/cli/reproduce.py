"""Paired AR q / MAR q repetitions over consecutive seeds"""

from __future__ import annotations

from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from pathlib import Path

from rich.console import Console
from rich.progress import Progress

from marq.cli.args import CliConfig
from marq.constants import EXIT_OK, METHOD_ARQ, METHOD_MARQ
from marq.core.solver import MultilevelSolver
from marq.formatters.json_output import solve_to_dict, summary_to_dict, write_json
from marq.formatters.trace_csv import write_runs_csv
from marq.models.report import ComparisonSummary, RunReport
from marq.models.transfer import LevelHierarchy
from marq.problems.grid import build_hierarchy, random_init, rmse
from marq.services.display_service import DisplayService
from marq.services.metrics import ReportCollector, compare_methods
from marq.utils.logging import get_logger
from marq.utils.threading import get_optimal_worker_count

console = Console()
logger = get_logger(__name__)


def run_one(cfg: CliConfig, hierarchy: LevelHierarchy, method: str, seed: int) -> RunReport:
    """One minimization from the seed's random start; arq uses only the top level."""
    levels = hierarchy if method == METHOD_MARQ else hierarchy.truncated(1)
    x0 = random_init(hierarchy.top.dim, cfg.a, seed)
    report = MultilevelSolver(levels, cfg.solver, cfg.q, method=method).minimize(x0, seed=seed)
    report.rmse_final = rmse(report.x_final, hierarchy.metadata["problem"])
    return report


def run_repetitions(cfg: CliConfig, hierarchy: LevelHierarchy) -> ReportCollector:
    """Run both methods for seeds base_seed .. base_seed + reps - 1."""
    tasks = [
        (method, cfg.seed + rep) for rep in range(cfg.reps) for method in (METHOD_ARQ, METHOD_MARQ)
    ]
    collector = ReportCollector()

    if cfg.sequential or cfg.debug:
        for method, seed in tasks:
            logger.info(f"running {method} seed={seed}")
            collector.add(run_one(cfg, hierarchy, method, seed))
        return collector

    workers = min(get_optimal_worker_count(cfg.workers), len(tasks))
    logger.info(f"running {len(tasks)} runs on {workers} workers")
    with (
        Progress(console=console, transient=True) as progress,
        ThreadPoolExecutor(max_workers=workers) as executor,
    ):
        task_id = progress.add_task("Solving", total=len(tasks))
        futures: dict[Future, tuple[str, int]] = {
            executor.submit(run_one, cfg, hierarchy, method, seed): (method, seed)
            for method, seed in tasks
        }
        for future in as_completed(futures):
            method, seed = futures[future]
            collector.add(future.result())
            progress.update(task_id, advance=1, description=f"{method} seed={seed} done")
    return collector


def run_reproduce(cfg: CliConfig, display: DisplayService | None = None) -> int:
    """Run the paired comparison and write summary.json, runs.csv and per-run reports.

    FAIL runs are recorded in the outputs and excluded from the save statistics;
    they do not change the exit code.
    """
    display = display or DisplayService(console=console, verbose=cfg.verbose)
    output = Path(cfg.output)
    hierarchy = build_hierarchy(cfg.n1d, cfg.levels, cfg.rhs)

    collector = run_repetitions(cfg, hierarchy)
    arc_reports = collector.reports(METHOD_ARQ)
    marc_reports = collector.reports(METHOD_MARQ)
    summary: ComparisonSummary = compare_methods(arc_reports, marc_reports)

    problem = cfg.problem.to_dict()
    for report in arc_reports + marc_reports:
        write_json(
            solve_to_dict(report, {**problem, "seed": report.seed}),
            output / "runs" / f"{report.method}-{report.seed}.json",
        )
    ordered = sorted(arc_reports + marc_reports, key=lambda r: (r.seed, r.method))
    write_runs_csv(ordered, output / "runs.csv")
    write_json(
        summary_to_dict(
            summary,
            ordered,
            n1d=cfg.n1d,
            levels=cfg.levels,
            a=cfg.a,
            reps=cfg.reps,
            base_seed=cfg.seed,
            q=cfg.q,
            rhs=cfg.rhs,
            config=cfg.solver.to_dict(),
        ),
        output / "summary.json",
    )

    display.display_runs(ordered)
    display.display_summary(summary)
    console.print(f"[dim]Wrote {output / 'summary.json'}[/dim]")
    return EXIT_OK
