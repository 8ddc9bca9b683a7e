"""Logging setup: rich console output plus an optional per-run log file."""

import logging
from pathlib import Path

from rich.console import Console
from rich.logging import RichHandler

FILE_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"
_PACKAGE_PREFIXES = ("marq.", "services.")


def _console_level(verbose: bool, debug: bool) -> int:
    if debug:
        return logging.DEBUG
    return logging.INFO if verbose else logging.WARNING


def setup_logging(verbose: bool = False, debug: bool = False, log_file: Path | None = None) -> None:
    """Configure the root logger for one CLI invocation.

    The console shows WARNING and up, INFO with ``verbose`` and everything
    with ``debug``. ``log_file`` (``marq.log`` in the output directory)
    always receives DEBUG records, so a quiet run still leaves a full log.
    Calling this again replaces the previous handlers.
    """
    level = _console_level(verbose, debug)
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG if log_file is not None else level)

    console_handler = RichHandler(
        console=Console(stderr=True),
        level=level,
        show_time=debug,
        show_path=debug,
        markup=False,
        rich_tracebacks=debug,
    )
    console_handler.setFormatter(logging.Formatter("[%(name)s] %(message)s"))
    root.addHandler(console_handler)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt="%H:%M:%S"))
        root.addHandler(file_handler)


def get_logger(name: str) -> logging.Logger:
    """Logger named relative to the package, e.g. ``core.solver``."""
    for prefix in _PACKAGE_PREFIXES:
        if name.startswith(prefix):
            name = name[len(prefix) :]
    return logging.getLogger(name)
