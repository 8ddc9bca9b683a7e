"""Finite-difference benchmark: -Laplace(u) + exp(u) = g on the unit square.

Zero Dirichlet boundary, n1d x n1d interior points, unknowns column-stacked
(the x index runs fastest). The discrete system A u + exp(u) = g is the
optimality condition of

    f(u) = 1/2 u'Au + sum(exp(u)) - g'u,

which is strictly convex, so its minimizer is unique.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from marq.constants import EXP_OVERFLOW_LIMIT
from marq.exceptions import InvalidArgumentError, ObjectiveOverflowError
from marq.models.oracle import ObjectiveOracle, Vector
from marq.models.transfer import Level, LevelHierarchy
from marq.services.multilevel import build_grid_transfer
from marq.utils.logging import get_logger

logger = get_logger(__name__)

RHS_MODES = ("discrete", "analytic")


@dataclass(frozen=True)
class GridProblem:
    """One assembled grid level."""

    n1d: int
    h: float
    A: sp.csr_matrix
    g_vec: Vector
    u_star: Vector
    rhs: str = "discrete"

    @property
    def n(self) -> int:
        return self.n1d * self.n1d


def grid_coordinates(n1d: int) -> tuple[np.ndarray, np.ndarray]:
    """Interior point coordinates (x, y), flattened in column-stacked order."""
    h = 1.0 / (n1d + 1)
    t = h * np.arange(1, n1d + 1)
    X, Y = np.meshgrid(t, t, indexing="ij")
    return X.ravel(order="F"), Y.ravel(order="F")


def u_star_values(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic solution sin(2 pi x(1-x)) sin(2 pi y(1-y))."""
    return np.sin(2 * np.pi * x * (1 - x)) * np.sin(2 * np.pi * y * (1 - y))


def laplacian_u_star(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Closed-form -Laplace(u*) at (x, y)."""
    a = 2 * np.pi * x * (1 - x)
    b = 2 * np.pi * y * (1 - y)
    da, db = 2 * np.pi * (1 - 2 * x), 2 * np.pi * (1 - 2 * y)
    dda = ddb = -4 * np.pi
    uxx = (-np.sin(a) * da**2 + np.cos(a) * dda) * np.sin(b)
    uyy = (-np.sin(b) * db**2 + np.cos(b) * ddb) * np.sin(a)
    return -(uxx + uyy)


def laplacian_matrix(n1d: int) -> sp.csr_matrix:
    """Five-point -Laplace on the n1d x n1d interior grid, scaled by 1/h^2."""
    h = 1.0 / (n1d + 1)
    T = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n1d, n1d)) / h**2
    eye = sp.identity(n1d)
    return sp.csr_matrix(sp.kron(eye, T) + sp.kron(T, eye))


def assemble(n1d: int, rhs: str = "discrete") -> GridProblem:
    """Assemble the level with n1d interior points per side.

    With rhs="discrete" the right-hand side is A u* + exp(u*), so u* is the
    exact discrete minimizer; with rhs="analytic" it samples -Laplace(u*) + exp(u*).
    """
    if n1d < 2:
        raise InvalidArgumentError(f"n1d must be at least 2, got {n1d}")
    if rhs not in RHS_MODES:
        raise InvalidArgumentError(f"rhs must be one of {RHS_MODES}, got '{rhs}'")
    A = laplacian_matrix(n1d)
    x, y = grid_coordinates(n1d)
    u_star = u_star_values(x, y)
    if rhs == "discrete":
        g_vec = A @ u_star + np.exp(u_star)
    else:
        g_vec = laplacian_u_star(x, y) + np.exp(u_star)
    return GridProblem(n1d=n1d, h=1.0 / (n1d + 1), A=A, g_vec=g_vec, u_star=u_star, rhs=rhs)


def _safe_exp(u: Vector) -> Vector:
    peak = float(np.max(u)) if u.size else 0.0
    if peak > EXP_OVERFLOW_LIMIT:
        raise ObjectiveOverflowError(peak, EXP_OVERFLOW_LIMIT)
    return np.exp(u)


def objective_oracle(p: GridProblem) -> ObjectiveOracle:
    """f(u) = 1/2 u'Au + sum(exp(u)) - g'u with its gradient and sparse Hessian."""
    A, g = p.A, p.g_vec

    def eval_f(u: Vector) -> float:
        return 0.5 * float(u @ (A @ u)) + float(np.sum(_safe_exp(u))) - float(g @ u)

    def eval_grad(u: Vector) -> Vector:
        return A @ u + _safe_exp(u) - g

    def eval_hess(u: Vector) -> sp.csr_matrix:
        return sp.csr_matrix(A + sp.diags(_safe_exp(u)))

    return ObjectiveOracle(
        dim=p.n, eval_f=eval_f, eval_grad=eval_grad, eval_hess=eval_hess, name=f"grid{p.n1d}"
    )


def level_sizes(n1d_top: int, levels: int) -> list[int]:
    """Points per side from the coarsest level up.

    Raises:
        InvalidArgumentError: if n1d_top is not divisible by 2^(levels-1) or the
            coarsest grid would have fewer than 2 points per side
    """
    if levels < 1:
        raise InvalidArgumentError(f"levels must be at least 1, got {levels}")
    factor = 2 ** (levels - 1)
    if n1d_top % factor != 0:
        raise InvalidArgumentError(
            f"n1d={n1d_top} is not divisible by 2^(levels-1)={factor} for {levels} levels"
        )
    if n1d_top // factor < 2:
        raise InvalidArgumentError(
            f"n1d={n1d_top} with {levels} levels leaves fewer than 2 points per side on the coarsest grid"
        )
    return [n1d_top // 2 ** (levels - index) for index in range(1, levels + 1)]


def build_hierarchy(n1d_top: int, levels: int, rhs: str = "discrete") -> LevelHierarchy:
    """Nested grids, each with its own discretized objective, coarsest first."""
    sizes = level_sizes(n1d_top, levels)
    problems = [assemble(n1d, rhs) for n1d in sizes]
    built = []
    for index, problem in enumerate(problems, start=1):
        transfer = build_grid_transfer(sizes[index - 2]) if index > 1 else None
        built.append(Level(index=index, oracle=objective_oracle(problem), transfer=transfer))
    logger.debug(f"grid hierarchy dims (top down): {[p.n for p in reversed(problems)]}")
    return LevelHierarchy(
        levels=tuple(built),
        metadata={"n1d": sizes, "rhs": rhs, "problem": problems[-1]},
    )


def rmse(u: Vector, p: GridProblem) -> float:
    """Root-mean-square error against the sampled analytic solution."""
    if u.shape != p.u_star.shape:
        raise InvalidArgumentError(f"expected a vector of length {p.n}, got shape {u.shape}")
    return float(np.sqrt(np.mean((u - p.u_star) ** 2)))


def random_init(n: int, a: float, seed: int) -> Vector:
    """Entries i.i.d. uniform on [0, a], reproducible per seed."""
    if not a > 0.0:
        raise InvalidArgumentError(f"initial-guess amplitude must be positive, got {a}")
    return a * np.random.default_rng(seed).random(n)


@dataclass(frozen=True)
class ProblemDescriptor:
    """Reproducible description of a benchmark instance."""

    n1d: int = 64
    levels: int = 4
    seed: int = 0
    a: float = 1.0
    rhs: str = "discrete"

    def __post_init__(self):
        level_sizes(self.n1d, self.levels)
        if self.rhs not in RHS_MODES:
            raise InvalidArgumentError(f"rhs must be one of {RHS_MODES}, got '{self.rhs}'")
        if not self.a > 0.0:
            raise InvalidArgumentError(f"a must be positive, got {self.a}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ProblemDescriptor:
        known = {"n1d", "levels", "seed", "a", "rhs"}
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def load(cls, path: str | Path) -> ProblemDescriptor:
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidArgumentError(f"Could not read problem file {path}: {e}") from e
        if not isinstance(payload, dict):
            raise InvalidArgumentError(f"Problem file {path} must contain a JSON object")
        return cls.from_dict(payload)

    def save(self, path: str | Path) -> None:
        payload = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        Path(path).write_text(payload, encoding="utf-8")
