"""Objective oracle model"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from marq.exceptions import InvalidArgumentError

Vector = np.ndarray
#: Hessians are dense ndarrays or scipy sparse matrices.
Matrix = np.ndarray | sp.spmatrix | sp.sparray


@dataclass(frozen=True)
class ObjectiveOracle:
    """Callable bundle giving f, its gradient and its Hessian on one level.

    ``eval_hess`` may be None for first-order (q=1) use.
    """

    dim: int
    eval_f: Callable[[Vector], float]
    eval_grad: Callable[[Vector], Vector]
    eval_hess: Callable[[Vector], Matrix] | None = None
    name: str = "objective"

    def __post_init__(self):
        if self.dim <= 0:
            raise InvalidArgumentError(f"oracle dimension must be positive, got {self.dim}")

    @property
    def has_hessian(self) -> bool:
        return self.eval_hess is not None

    def check_point(self, x: Vector) -> None:
        """Raise InvalidArgumentError unless x is a vector of this oracle's dimension."""
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise InvalidArgumentError(
                f"{self.name}: expected vector of length {self.dim}, got shape {x.shape}"
            )

    def f(self, x: Vector) -> float:
        return float(self.eval_f(x))

    def grad(self, x: Vector) -> Vector:
        return np.asarray(self.eval_grad(x), dtype=float)

    def hess(self, x: Vector) -> Matrix:
        if self.eval_hess is None:
            raise InvalidArgumentError(f"{self.name}: no Hessian available (order-1 oracle)")
        return self.eval_hess(x)
