"""Sizing of the pool that runs independent repetitions."""

from __future__ import annotations

import os
import platform
import sys
from typing import Any

import numpy as np
import scipy

THREADS_ENV_VAR = "MARQ_THREADS"


def is_free_threading_enabled() -> bool:
    """True on a free-threaded build (3.13+) running with the GIL off."""
    gil_check = getattr(sys, "_is_gil_enabled", None)
    return gil_check is not None and not gil_check()


def _positive_int(raw: str | int | None) -> int | None:
    if raw is None:
        return None
    try:
        value = int(raw)
    except (TypeError, ValueError):
        return None
    return value if value > 0 else None


def get_optimal_worker_count(user_specified: int | None = None) -> int:
    """Workers for ``reproduce``: the flag, then ``MARQ_THREADS``, then the CPU count.

    Factorizations release the GIL inside LAPACK/SuperLU, so threads scale up
    to the core count even on a GIL build. Never returns less than 1.
    """
    explicit = _positive_int(user_specified)
    if explicit is not None:
        return explicit
    from_env = _positive_int(os.environ.get(THREADS_ENV_VAR))
    if from_env is not None:
        return from_env
    return os.cpu_count() or 1


def get_threading_info() -> dict[str, Any]:
    """Interpreter and numeric stack details printed by ``--debug``."""
    if not hasattr(sys, "_is_gil_enabled"):
        mode = "GIL-enabled (Python < 3.13)"
    else:
        mode = "free-threading" if is_free_threading_enabled() else "GIL-enabled"
    return {
        "mode": mode,
        "free_threading": is_free_threading_enabled(),
        "cpu_count": os.cpu_count() or 1,
        "optimal_workers": get_optimal_worker_count(),
        "env_override": os.environ.get(THREADS_ENV_VAR),
        "python_version": platform.python_version(),
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
    }
