"""Order-q Taylor model with (q+1)-power regularization, q in {1, 2}.

The model at an expansion point x is

    T(s) = f(x) + g's (+ 1/2 s'Bs when q = 2)
    m(s) = T(s) + lambda/(q+1) ||s||^{q+1}
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from marq.exceptions import InvalidArgumentError
from marq.models.oracle import Matrix, Vector

SUPPORTED_ORDERS = (1, 2)


def check_order(q: int) -> None:
    """Raise InvalidArgumentError unless q is a supported model order."""
    if q not in SUPPORTED_ORDERS:
        raise InvalidArgumentError(f"model order q must be one of {SUPPORTED_ORDERS}, got {q}")


@dataclass(frozen=True)
class RegularizedModel:
    """Regularized Taylor model data at one expansion point."""

    base_f: float
    g: Vector
    B: Matrix | None
    lam: float
    q: int

    def __post_init__(self):
        check_order(self.q)
        if not self.lam > 0.0:
            raise InvalidArgumentError(f"regularization parameter must be positive, got {self.lam}")
        if self.g.ndim != 1:
            raise InvalidArgumentError(f"gradient must be a vector, got shape {self.g.shape}")
        if self.q == 2:
            if self.B is None:
                raise InvalidArgumentError("order-2 model requires a Hessian")
            if self.B.shape != (self.dim, self.dim):
                raise InvalidArgumentError(
                    f"Hessian shape {self.B.shape} does not match gradient length {self.dim}"
                )

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def curvature(self, s: Vector) -> float:
        """Return s'Bs (zero for q = 1)."""
        if self.q == 1:
            return 0.0
        return float(s @ (self.B @ s))


def _check_step(m: RegularizedModel, s: Vector) -> None:
    if s.ndim != 1 or s.shape[0] != m.dim:
        raise InvalidArgumentError(f"step of shape {s.shape} does not match model dimension {m.dim}")


def taylor_value(m: RegularizedModel, s: Vector) -> float:
    """Truncated Taylor model value T(s), without the regularization term."""
    _check_step(m, s)
    value = m.base_f + float(m.g @ s)
    if m.q == 2:
        value += 0.5 * m.curvature(s)
    return value


def regularized_value(m: RegularizedModel, s: Vector) -> float:
    """T(s) + lambda/(q+1) ||s||^{q+1}."""
    norm_s = float(np.linalg.norm(s))
    return taylor_value(m, s) + m.lam / (m.q + 1) * norm_s ** (m.q + 1)


def regularized_grad(m: RegularizedModel, s: Vector) -> Vector:
    """Gradient of the regularized model: g (+ Bs) + lambda ||s||^{q-1} s."""
    _check_step(m, s)
    grad = np.array(m.g, dtype=float, copy=True)
    if m.q == 2:
        grad += np.asarray(m.B @ s).ravel()
    norm_s = float(np.linalg.norm(s))
    return grad + m.lam * norm_s ** (m.q - 1) * s