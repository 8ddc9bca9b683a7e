"""Command-line interface for marq.

This package provides the CLI entry point, argument parsing and the
repetition runner behind ``marq reproduce``.
"""

from .args import CliConfig, parse_args
from .main import main

__all__ = ["CliConfig", "main", "parse_args"]
