"""Small analytic objectives for tests and identity-collapse experiments"""

from __future__ import annotations

import numpy as np

from marq.exceptions import InvalidArgumentError
from marq.models.oracle import ObjectiveOracle, Vector
from marq.models.transfer import Level, LevelHierarchy, TransferPair


def quadratic(Q: np.ndarray, b: Vector | None = None) -> ObjectiveOracle:
    """f(x) = 1/2 x'Qx - b'x."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InvalidArgumentError(f"Q must be square, got shape {Q.shape}")
    n = Q.shape[0]
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    return ObjectiveOracle(
        dim=n,
        eval_f=lambda x: 0.5 * float(x @ Q @ x) - float(b @ x),
        eval_grad=lambda x: Q @ x - b,
        eval_hess=lambda x: Q,
        name="quadratic",
    )


def rosenbrock() -> ObjectiveOracle:
    """Two-dimensional Rosenbrock function (1 - x)^2 + 100 (y - x^2)^2."""

    def eval_f(z: Vector) -> float:
        x, y = z
        return float((1 - x) ** 2 + 100 * (y - x * x) ** 2)

    def eval_grad(z: Vector) -> Vector:
        x, y = z
        return np.array([-2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x)])

    def eval_hess(z: Vector) -> np.ndarray:
        x, y = z
        return np.array([[2 - 400 * (y - 3 * x * x), -400 * x], [-400 * x, 200.0]])

    return ObjectiveOracle(
        dim=2, eval_f=eval_f, eval_grad=eval_grad, eval_hess=eval_hess, name="rosenbrock"
    )


def convex_quartic(dim: int, seed: int = 0) -> ObjectiveOracle:
    """f(x) = 1/2 x'Qx + 1/4 sum(x^4) - b'x with a random SPD Q."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((dim, dim))
    Q = G @ G.T / dim + np.eye(dim)
    b = rng.standard_normal(dim)

    return ObjectiveOracle(
        dim=dim,
        eval_f=lambda x: 0.5 * float(x @ Q @ x) + 0.25 * float(np.sum(x**4)) - float(b @ x),
        eval_grad=lambda x: Q @ x + x**3 - b,
        eval_hess=lambda x: Q + np.diag(3 * x**2),
        name=f"quartic{dim}",
    )


def identity_hierarchy(oracle: ObjectiveOracle, levels: int = 2) -> LevelHierarchy:
    """Every level is the same objective and every transfer is the identity."""
    if levels < 1:
        raise InvalidArgumentError(f"levels must be at least 1, got {levels}")
    built = [
        Level(
            index=index,
            oracle=oracle,
            transfer=TransferPair.identity(oracle.dim) if index > 1 else None,
        )
        for index in range(1, levels + 1)
    ]
    return LevelHierarchy(levels=tuple(built))
