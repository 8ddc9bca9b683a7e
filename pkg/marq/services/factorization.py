"""Shifted positive-definite factorizations with flop accounting.

Every step of the subproblem solver factors H + sigma*I. Dense matrices use
LAPACK Cholesky; sparse matrices use SuperLU in symmetric mode with diagonal
pivoting, which on an SPD matrix is a Cholesky-type factorization whose
pivots expose indefiniteness.

Flops are counted from what actually ran: for the sparse LU the exact
multiply-add count implied by the factor structure, for the dense Cholesky
the n^3/3 + 2n^2 model. The dense model count is always recorded as well.
"""

from __future__ import annotations

import threading
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sl
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from marq.exceptions import FACTORIZATION_ERRORS, FactorizationError
from marq.models.oracle import Matrix
from marq.utils.logging import get_logger

logger = get_logger(__name__)

# A pivot this small relative to the largest one is treated as zero.
PIVOT_RTOL = 1e-14


def dense_factorization_flops(n: int) -> int:
    """Flop model for one dense Cholesky factorization of order n."""
    return n**3 // 3 + 2 * n * n


def sparse_lu_flops(L: sp.csc_matrix, U: sp.csc_matrix) -> int:
    """Exact flop count of a right-looking sparse LU with the given factors.

    Eliminating pivot k costs l_k divisions and l_k*u_k multiply-adds, where
    l_k is the strictly-lower count of column k of L and u_k the strictly-upper
    count of row k of U.
    """
    n = L.shape[0]
    lower = np.diff(L.indptr) - 1  # L stores its unit diagonal
    upper = np.bincount(U.indices, minlength=n) - 1
    lower = np.maximum(lower, 0)
    upper = np.maximum(upper, 0)
    return int(np.sum(lower + 2 * lower * upper))


@dataclass
class FlopCounter:
    """Shadow counter incremented by every factorization attempt."""

    factorizations: int = 0
    flops: int = 0
    dense_flops: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, flops: int, dense_flops: int) -> None:
        with self._lock:
            self.factorizations += 1
            self.flops += flops
            self.dense_flops += dense_flops


@dataclass(frozen=True)
class ShiftedFactor:
    """A successful factorization of H + sigma*I."""

    sigma: float
    n: int
    flops: int
    dense_flops: int
    _solve: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return np.asarray(self._solve(rhs), dtype=float)


def _pivots_definite(pivots: np.ndarray) -> bool:
    if pivots.size == 0:
        return True
    largest = float(np.max(np.abs(pivots)))
    return bool(np.all(pivots > PIVOT_RTOL * largest)) and largest > 0.0


def _factorize_sparse(H, sigma: float, counter: FlopCounter | None) -> ShiftedFactor:
    n = H.shape[0]
    dense_flops = dense_factorization_flops(n)
    shifted = sp.csc_matrix(H + sigma * sp.identity(n, format="csc"))
    try:
        lu = splu(
            shifted,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except FACTORIZATION_ERRORS as e:
        if counter is not None:
            counter.record(0, dense_flops)
        logger.debug(f"SuperLU failed at sigma={sigma:.3e}: {e}")
        raise FactorizationError(sigma, str(e), flops=0, dense_flops=dense_flops) from e

    flops = sparse_lu_flops(lu.L, lu.U)
    if counter is not None:
        counter.record(flops, dense_flops)

    # Off-diagonal pivoting or a non-positive pivot means H + sigma*I is not SPD.
    if not np.array_equal(lu.perm_r, lu.perm_c) or not _pivots_definite(lu.U.diagonal()):
        raise FactorizationError(sigma, "non-positive pivot", flops=flops, dense_flops=dense_flops)
    return ShiftedFactor(sigma=sigma, n=n, flops=flops, dense_flops=dense_flops, _solve=lu.solve)


def _factorize_dense(H: np.ndarray, sigma: float, counter: FlopCounter | None) -> ShiftedFactor:
    n = H.shape[0]
    dense_flops = dense_factorization_flops(n)
    if counter is not None:
        counter.record(dense_flops, dense_flops)
    shifted = np.asarray(H, dtype=float) + sigma * np.eye(n)
    try:
        c, lower = sl.cho_factor(shifted, lower=True, check_finite=False)
    except FACTORIZATION_ERRORS as e:
        raise FactorizationError(sigma, str(e), flops=dense_flops, dense_flops=dense_flops) from e
    if not _pivots_definite(np.diag(c)):
        raise FactorizationError(
            sigma, "non-positive pivot", flops=dense_flops, dense_flops=dense_flops
        )

    def solve(rhs: np.ndarray) -> np.ndarray:
        return sl.cho_solve((c, lower), rhs, check_finite=False)

    return ShiftedFactor(sigma=sigma, n=n, flops=dense_flops, dense_flops=dense_flops, _solve=solve)


def factorize_shifted(H: Matrix, sigma: float, counter: FlopCounter | None = None) -> ShiftedFactor:
    """Factor H + sigma*I.

    Args:
        H: Symmetric dense or sparse matrix
        sigma: Nonnegative shift
        counter: Optional shadow counter, incremented even when the factorization fails

    Raises:
        FactorizationError: if H + sigma*I is not numerically positive definite
    """
    if sp.issparse(H):
        return _factorize_sparse(H, sigma, counter)
    return _factorize_dense(np.asarray(H), sigma, counter)


def matrix_inf_norm(H: Matrix) -> float:
    """Max absolute row sum; bounds every eigenvalue magnitude (Gershgorin)."""
    if sp.issparse(H):
        return float(abs(H).sum(axis=1).max()) if H.shape[0] else 0.0
    return float(np.linalg.norm(np.asarray(H), np.inf)) if H.shape[0] else 0.0
