"""Command-line interface for marq"""

import json
import sys
from pathlib import Path
from typing import Any

from rich.console import Console

from marq.cli.args import CliConfig, parse_args
from marq.constants import EXIT_FAIL, EXIT_OK, EXIT_USAGE
from marq.exceptions import MarqError, UsageError
from marq.formatters.json_output import schema_to_dict, solve_to_dict, write_json
from marq.formatters.trace_csv import write_trace_csv
from marq.services.display_service import DisplayService
from marq.utils.logging import get_logger, setup_logging

console = Console()
logger = get_logger(__name__)


def _print_json(payload: dict[str, Any]) -> None:
    """Print a JSON payload to stdout for machine-readable modes."""
    print(json.dumps(payload, indent=2, sort_keys=True))


def _print_debug_info(cfg: CliConfig) -> None:
    from marq.utils.threading import get_threading_info

    console.print("[yellow]Debug mode enabled[/yellow]")
    threading_info = get_threading_info()
    console.print("[yellow]Threading Information:[/yellow]")
    console.print(f"  Python version: {threading_info['python_version']}")
    console.print(f"  Threading mode: {threading_info['mode']}")
    console.print(f"  CPU count: {threading_info['cpu_count']}")
    console.print(f"  Optimal workers: {threading_info['optimal_workers']}")
    console.print(f"  Free-threading enabled: {threading_info['free_threading']}")
    console.print(f"  numpy {threading_info['numpy_version']}, scipy {threading_info['scipy_version']}")
    if cfg.command in ("solve", "reproduce"):
        console.print("[yellow]Problem:[/yellow]")
        for key, value in cfg.problem.to_dict().items():
            console.print(f"  {key}: {value}")
        console.print("[dim]Note: Debug mode forces sequential repetitions for readable logs[/dim]")


def run_solve(cfg: CliConfig, display: DisplayService | None = None) -> int:
    """One minimization; writes report.json and trace.csv under cfg.output."""
    from marq.cli.reproduce import run_one
    from marq.problems.grid import build_hierarchy

    display = display or DisplayService(console=console, verbose=cfg.verbose)
    output = Path(cfg.output)
    hierarchy = build_hierarchy(cfg.n1d, cfg.levels, cfg.rhs)
    if cfg.verbose:
        display.display_config(cfg.solver.to_dict())

    report = run_one(cfg, hierarchy, cfg.method, cfg.seed)

    write_json(solve_to_dict(report, cfg.problem.to_dict()), output / "report.json")
    write_trace_csv(report.trace, output / "trace.csv")
    display.display_report(report, show_trace=cfg.show_trace)
    console.print(f"[dim]Wrote {output / 'report.json'} and {output / 'trace.csv'}[/dim]")
    return EXIT_OK if report.converged else EXIT_FAIL


def run_audit(cfg: CliConfig, display: DisplayService | None = None) -> int:
    """Run the invariant suites; nonzero exit if any check fails."""
    from marq.services.audit import run_audit_checks

    display = display or DisplayService(console=console, verbose=cfg.verbose)
    checks = run_audit_checks(q=cfg.q, inject_fault=cfg.inject_fault)
    display.display_audit(checks)
    return EXIT_OK if all(check.passed for check in checks) else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the application."""
    cfg = None
    try:
        cfg = parse_args(argv)

        if cfg.command == "schema":
            _print_json(schema_to_dict())
            return EXIT_OK

        log_file = Path(cfg.output) / "marq.log" if cfg.output is not None else None
        setup_logging(verbose=cfg.verbose, debug=cfg.debug, log_file=log_file)
        if cfg.debug:
            _print_debug_info(cfg)

        if cfg.command == "solve":
            return run_solve(cfg)
        if cfg.command == "reproduce":
            from marq.cli.reproduce import run_reproduce

            return run_reproduce(cfg)
        if cfg.command == "audit":
            return run_audit(cfg)
        raise UsageError(f"unknown command '{cfg.command}'")
    except KeyboardInterrupt:
        console.print("\n[yellow]Operation cancelled by user[/yellow]")
        return EXIT_USAGE
    except MarqError as e:
        # Expected errors: bad flags, bad files, invalid constants
        console.print(f"\n[red]{e}[/red]\n")
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001 - CLI entry point must fail closed
        console.print(f"[red]Error: {e}[/red]")
        if cfg is not None and cfg.debug:
            console.print_exception()
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
