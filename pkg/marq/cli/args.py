"""Command-line argument parsing for marq."""

from __future__ import annotations

import argparse
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from marq.__version__ import __version__
from marq.config import SolverConfig, load_config
from marq.constants import METHOD_ARQ, METHOD_MARQ
from marq.exceptions import InvalidArgumentError, UsageError
from marq.problems.grid import RHS_MODES, ProblemDescriptor
from marq.services.audit import FAULTS

# SolverConfig fields restricted to a fixed set of values
_CHOICES = {
    "recursion_policy": ["free", "fixed"],
    "descend_policy": ["always", "alternate"],
}


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_solver_overrides(parser: argparse.ArgumentParser) -> None:
    """One flag per SolverConfig field; unset flags leave the file/default value."""
    group = parser.add_argument_group("solver constants (override --config)")
    defaults = SolverConfig()
    for f in dataclasses.fields(SolverConfig):
        default = getattr(defaults, f.name)
        help_text = f"default: {default}"
        if isinstance(default, bool):
            group.add_argument(
                _flag(f.name),
                dest=f.name,
                action=argparse.BooleanOptionalAction,
                default=None,
                help=help_text,
            )
        elif f.name == "eps_per_level":
            group.add_argument(
                _flag(f.name),
                dest=f.name,
                type=float,
                nargs="+",
                metavar="EPS",
                default=None,
                help="gradient tolerance per level, coarsest first (default: --eps everywhere)",
            )
        else:
            group.add_argument(
                _flag(f.name),
                dest=f.name,
                type=type(default),
                choices=_CHOICES.get(f.name),
                default=None,
                help=help_text,
            )


def _add_problem_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("problem (override --problem)")
    group.add_argument("--n1d", type=int, help="interior points per side on the finest grid (default: 64)")
    group.add_argument("--levels", type=int, help="number of grid levels (default: 4)")
    group.add_argument("--a", type=float, help="initial guess amplitude, u0 = a * rand (default: 1)")
    group.add_argument("--seed", type=int, help="random seed (base seed for reproduce, default: 0)")
    group.add_argument("--rhs", choices=list(RHS_MODES), help="right-hand side construction (default: discrete)")
    group.add_argument("--q", type=int, choices=[1, 2], default=2, help="model order (default: 2)")
    parser.add_argument("--problem", type=Path, metavar="FILE", help="JSON problem descriptor")
    parser.add_argument("--config", type=Path, metavar="FILE", help="JSON solver configuration")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-v", "--verbose", action="store_true", help="Show verbose output")
    parser.add_argument("--debug", action="store_true", help="Show debug information")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="marq",
        description="Adaptive regularization (AR q) and its multilevel extension (MAR q) "
        "on the -Laplace(u) + exp(u) = g benchmark.",
        epilog="Exit codes: 0 converged / checks passed, 1 usage error, 2 FAIL.",
    )
    parser.add_argument("--version", action="version", version=f"marq {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgumentParser)
    sub.required = True

    solve = sub.add_parser("solve", help="Run one minimization and write report.json/trace.csv")
    solve.add_argument("--method", choices=[METHOD_ARQ, METHOD_MARQ], default=METHOD_MARQ)
    solve.add_argument("--output", type=Path, default=Path("marq-output"), help="output directory")
    solve.add_argument("--show-trace", action="store_true", help="print the iteration table")
    _add_problem_args(solve)
    _add_solver_overrides(solve)
    _add_common(solve)

    reproduce = sub.add_parser("reproduce", help="Compare AR q and MAR q over repeated seeds")
    reproduce.add_argument("--reps", type=int, default=10, help="repetitions (default: 10)")
    reproduce.add_argument("--output", type=Path, default=Path("marq-reproduce"), help="output directory")
    reproduce.add_argument(
        "--workers",
        type=int,
        metavar="N",
        help="parallel runs (default: MARQ_THREADS or the CPU count)",
    )
    reproduce.add_argument("--sequential", action="store_true", help="run repetitions one at a time")
    _add_problem_args(reproduce)
    _add_solver_overrides(reproduce)
    _add_common(reproduce)

    audit = sub.add_parser("audit", help="Run the invariant suites on small instances")
    audit.add_argument("--q", type=int, choices=[1, 2], default=2, help="model order (default: 2)")
    audit.add_argument("--inject-fault", choices=list(FAULTS), help="corrupt one component on purpose")
    _add_common(audit)

    schema = sub.add_parser("schema", help="Print the JSON output schema")
    _add_common(schema)
    return parser


@dataclass
class CliConfig:
    """Fully resolved command-line configuration."""

    command: str
    solver: SolverConfig = field(default_factory=SolverConfig)
    problem: ProblemDescriptor = field(default_factory=ProblemDescriptor)
    q: int = 2
    method: str = METHOD_MARQ
    reps: int = 10
    output: Path | None = None
    workers: int | None = None
    sequential: bool = False
    show_trace: bool = False
    inject_fault: str | None = None
    verbose: bool = False
    debug: bool = False

    @property
    def n1d(self) -> int:
        return self.problem.n1d

    @property
    def levels(self) -> int:
        return self.problem.levels

    @property
    def a(self) -> float:
        return self.problem.a

    @property
    def seed(self) -> int:
        return self.problem.seed

    @property
    def rhs(self) -> str:
        return self.problem.rhs


def _resolve_solver(args: argparse.Namespace) -> SolverConfig:
    base = load_config(args.config) if getattr(args, "config", None) else SolverConfig()
    overrides = {
        name: getattr(args, name)
        for name in SolverConfig.known_fields()
        if getattr(args, name, None) is not None
    }
    return base.replace(**overrides) if overrides else base


def _resolve_problem(args: argparse.Namespace) -> ProblemDescriptor:
    base = ProblemDescriptor.load(args.problem) if getattr(args, "problem", None) else None
    values = base.to_dict() if base else {}
    for name in ("n1d", "levels", "a", "seed", "rhs"):
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    return ProblemDescriptor.from_dict(values)


def parse_args(argv: list[str] | None = None) -> CliConfig:
    """Parse and validate command-line arguments.

    Raises:
        UsageError: on malformed flags or values violating SolverConfig/problem constraints
    """
    args = build_parser().parse_args(argv)
    try:
        solver = _resolve_solver(args) if args.command in ("solve", "reproduce") else SolverConfig()
        problem = (
            _resolve_problem(args) if args.command in ("solve", "reproduce") else ProblemDescriptor()
        )
    except InvalidArgumentError as e:
        raise UsageError(str(e)) from e

    reps = getattr(args, "reps", 10)
    if reps < 1:
        raise UsageError(f"--reps must be at least 1, got {reps}")
    workers = getattr(args, "workers", None)
    if workers is not None and workers < 1:
        raise UsageError(f"--workers must be at least 1, got {workers}")

    return CliConfig(
        command=args.command,
        solver=solver,
        problem=problem,
        q=getattr(args, "q", 2),
        method=getattr(args, "method", METHOD_MARQ),
        reps=reps,
        output=getattr(args, "output", None),
        workers=workers,
        sequential=getattr(args, "sequential", False),
        show_trace=getattr(args, "show_trace", False),
        inject_fault=getattr(args, "inject_fault", None),
        verbose=args.verbose,
        debug=args.debug,
    )
