"""Utility functions for marq.

This package provides utility modules:
- logging: Logging configuration and logger creation
- threading: Worker-pool sizing for independent repetitions
"""

from .logging import get_logger, setup_logging
from .threading import (
    THREADS_ENV_VAR,
    get_optimal_worker_count,
    get_threading_info,
    is_free_threading_enabled,
)

__all__ = [
    "THREADS_ENV_VAR",
    "get_logger",
    "get_optimal_worker_count",
    "get_threading_info",
    "is_free_threading_enabled",
    "setup_logging",
]
