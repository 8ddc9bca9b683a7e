"""Custom exceptions for marq"""

from __future__ import annotations

import numpy as np


class MarqError(Exception):
    """Base exception for all marq errors."""


class InvalidArgumentError(MarqError, ValueError):
    """Raised when an operation receives arguments violating its preconditions."""


class UsageError(MarqError):
    """Raised for malformed command-line usage."""


class FactorizationError(MarqError):
    """Raised when a shifted matrix is not numerically positive definite.

    Internal to the subproblem solver: a failed factorization at a trial shift
    means the shift must grow, not that the solve failed. Carries the work the
    attempt cost.
    """

    def __init__(self, sigma: float, message: str | None = None, flops: int = 0, dense_flops: int = 0):
        self.sigma = sigma
        self.flops = flops
        self.dense_flops = dense_flops
        error_msg = f"Factorization failed at shift sigma={sigma:.3e}"
        if message:
            error_msg += f": {message}"
        super().__init__(error_msg)


class SubproblemError(MarqError):
    """Raised when the regularized subproblem cannot be solved to tolerance.

    Carries the work already spent so that flop accounting stays exact even
    for failed solves.
    """

    def __init__(self, message: str, factorizations: int = 0, flops: int = 0, dense_flops: int = 0):
        self.factorizations = factorizations
        self.flops = flops
        self.dense_flops = dense_flops
        super().__init__(message)


class ObjectiveOverflowError(MarqError, FloatingPointError):
    """Raised when an objective evaluation would overflow."""

    def __init__(self, max_entry: float, limit: float):
        self.max_entry = max_entry
        self.limit = limit
        super().__init__(f"Objective overflow: exponent argument {max_entry:.3e} exceeds {limit:g}")


class CoherenceError(MarqError):
    """Raised in audit mode when a coarse model violates first/second-order coherence."""

    def __init__(self, check: str, value: float, bound: float):
        self.check = check
        self.value = value
        self.bound = bound
        super().__init__(f"Coherence check '{check}' failed: {value:.3e} > {bound:.3e}")


#: Exceptions raised by a dense or sparse factorization of a matrix that is
#: singular or indefinite:
#:
#: - ``np.linalg.LinAlgError`` - ``scipy.linalg.cho_factor`` on a non-SPD matrix
#:   (scipy re-exports the same class)
#: - ``RuntimeError``          - SuperLU's "Factor is exactly singular"
FACTORIZATION_ERRORS = (np.linalg.LinAlgError, RuntimeError)

#: Exceptions that make a single iteration unsuccessful rather than aborting the
#: run. The driver catches exactly these; anything else is a bug and surfaces.
STEP_ERRORS = (SubproblemError, ObjectiveOverflowError)
