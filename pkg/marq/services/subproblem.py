"""Approximate minimization of the regularized model.

For q = 1 the minimizer of g's + (lambda/2)||s||^2 is -g/lambda. For q = 2 the
global minimizer of g's + 1/2 s'Bs + (lambda/3)||s||^3 satisfies

    (B + sigma I) s = -g,   sigma = lambda ||s||,   B + sigma I positive semidefinite,

so the solve reduces to a scalar root find on phi(sigma) = ||s(sigma)|| - sigma/lambda,
each evaluation costing one factorization of B + sigma I.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from marq.constants import ORACLE_MAX_DIM
from marq.exceptions import FactorizationError, InvalidArgumentError, SubproblemError
from marq.models.oracle import Matrix, Vector
from marq.models.regularized import RegularizedModel, regularized_grad
from marq.services.factorization import (
    FlopCounter,
    ShiftedFactor,
    factorize_shifted,
    matrix_inf_norm,
)
from marq.utils.logging import get_logger

logger = get_logger(__name__)

# Bracket width (relative) at which an indefinite lower end is taken as the
# eigenvalue boundary.
HARD_CASE_RTOL = 1e-10
# Bracket width (relative) below which sigma cannot be resolved in floating point.
COLLAPSE_RTOL = 8.0 * np.finfo(float).eps
INVERSE_ITERATIONS = 8


@dataclass(frozen=True)
class SubproblemResult:
    """Outcome of one regularized subproblem solve."""

    step: Vector
    model_decrease: float  # T(0) - T(step), regularization excluded
    residual_norm: float  # ||grad of the regularized model at step||
    factorizations: int = 0
    flops: int = 0
    dense_flops: int = 0
    sigma: float = 0.0
    iterations: int = 0
    hard_case: bool = False

    @property
    def step_norm(self) -> float:
        return float(np.linalg.norm(self.step))


def solve_q1(g: Vector, lam: float) -> SubproblemResult:
    """Closed-form minimizer -g/lambda of the order-1 regularized model."""
    if not lam > 0.0:
        raise InvalidArgumentError(f"regularization parameter must be positive, got {lam}")
    step = -np.asarray(g, dtype=float) / lam
    return SubproblemResult(
        step=step,
        model_decrease=float(g @ g) / lam,
        residual_norm=0.0,
        sigma=lam,
    )


class _SecularSolver:
    """Safeguarded Newton iteration on phi(sigma) with bisection fallback."""

    def __init__(
        self,
        g: Vector,
        B: Matrix,
        lam: float,
        theta: float,
        secular_tol: float,
        max_iters: int,
        counter: FlopCounter | None,
    ):
        self.g = np.asarray(g, dtype=float)
        self.B = B
        self.lam = lam
        self.theta = theta
        self.secular_tol = secular_tol
        self.max_iters = max_iters
        self.counter = counter
        self.n = self.g.shape[0]
        self.g_norm = float(np.linalg.norm(self.g))
        self.b_norm = matrix_inf_norm(B)
        self.factorizations = 0
        self.flops = 0
        self.dense_flops = 0

    def _charge(self, flops: int, dense_flops: int) -> None:
        self.factorizations += 1
        self.flops += flops
        self.dense_flops += dense_flops

    def _factor(self, sigma: float) -> ShiftedFactor | None:
        try:
            factor = factorize_shifted(self.B, sigma, self.counter)
        except FactorizationError as e:
            self._charge(e.flops, e.dense_flops)
            return None
        self._charge(factor.flops, factor.dense_flops)
        return factor

    def _tolerance(self, sigma: float, s_norm: float) -> float:
        # |sigma - lambda ||s|| | <= tol implies both secular consistency and,
        # for theta > 0, the inner rule ||g + Bs + lambda||s||s|| <= theta ||s||^2.
        tol = self.secular_tol * (1.0 + sigma)
        if self.theta > 0.0:
            tol = min(tol, self.theta * s_norm)
        return tol

    def _finish(self, step: Vector, sigma: float, iterations: int, hard_case: bool = False):
        model = RegularizedModel(base_f=0.0, g=self.g, B=self.B, lam=self.lam, q=2)
        decrease = -(float(self.g @ step) + 0.5 * model.curvature(step))
        residual = float(np.linalg.norm(regularized_grad(model, step)))
        return SubproblemResult(
            step=step,
            model_decrease=decrease,
            residual_norm=residual,
            factorizations=self.factorizations,
            flops=self.flops,
            dense_flops=self.dense_flops,
            sigma=sigma,
            iterations=iterations,
            hard_case=hard_case,
        )

    def _leftmost_direction(self, factor: ShiftedFactor) -> Vector:
        """Inverse iteration with a factorization shifted just past the leftmost eigenvalue."""
        v = np.random.default_rng(0).standard_normal(self.n)
        v /= np.linalg.norm(v)
        for _ in range(INVERSE_ITERATIONS):
            v = factor.solve(v)
            v /= np.linalg.norm(v)
        return v

    def _hard_case(self, sigma: float, factor: ShiftedFactor, s: Vector, iterations: int):
        """Move from s(sigma) along the leftmost eigenvector out to radius sigma/lambda."""
        u = self._leftmost_direction(factor)
        target = sigma / self.lam
        su = float(s @ u)
        disc = max(su * su - (float(s @ s) - target * target), 0.0)
        model = RegularizedModel(base_f=0.0, g=self.g, B=self.B, lam=self.lam, q=2)
        candidates = [s + (-su + math.sqrt(disc)) * u, s + (-su - math.sqrt(disc)) * u]
        values = [
            float(self.g @ c) + 0.5 * model.curvature(c) + self.lam / 3.0 * target**3
            for c in candidates
        ]
        step = candidates[int(np.argmin(values))]
        logger.debug(f"hard case at sigma={sigma:.3e}, radius={target:.3e}")
        return self._finish(step, sigma, iterations, hard_case=True)

    def _zero_step(self) -> SubproblemResult | None:
        """With g = 0 and B positive semidefinite, s = 0 is a global minimizer."""
        shift = HARD_CASE_RTOL * (1.0 + self.b_norm)
        if self._factor(shift) is None:
            return None
        return self._finish(np.zeros(self.n), 0.0, 1)

    def run(self) -> SubproblemResult:
        # Every sigma below lo is indefinite or has phi > 0; phi(hi) <= 0 and
        # B + hi I is positive definite by Gershgorin.
        lo = 0.0
        lo_definite = True
        hi = self.b_norm * (1.0 + 1e-8) + math.sqrt(self.lam * self.g_norm) + 1e-12
        hi_state: tuple[ShiftedFactor, Vector] | None = None
        sigma = min(self.lam * self.g_norm / (1.0 + self.b_norm), hi)

        if self.g_norm == 0.0:
            zero = self._zero_step()
            if zero is not None:
                return zero

        for iteration in range(1, self.max_iters + 1):
            width = hi - lo
            at_eigenvalue = width <= HARD_CASE_RTOL * (1.0 + hi) and not lo_definite
            if at_eigenvalue or width <= COLLAPSE_RTOL * (1.0 + hi):
                # Near-hard case: phi jumps across the bracket, so complete s(hi)
                # along the leftmost eigenvector out to radius hi/lambda.
                if hi_state is not None:
                    return self._hard_case(hi, hi_state[0], hi_state[1], iteration)
                sigma = hi

            factor = self._factor(sigma)
            if factor is None:
                lo = max(lo, sigma)
                lo_definite = False
                sigma = 0.5 * (lo + hi)
                continue

            s = -factor.solve(self.g)
            s_norm = float(np.linalg.norm(s))
            gap = self.lam * s_norm - sigma
            if abs(gap) <= self._tolerance(sigma, s_norm):
                return self._finish(s, sigma, iteration)

            if gap > 0.0:
                lo = sigma
                lo_definite = True
            else:
                hi = sigma
                hi_state = (factor, s)

            candidate = math.nan
            if s_norm > 0.0:
                w = factor.solve(s)
                dphi = -float(s @ w) / s_norm - 1.0 / self.lam
                phi = gap / self.lam
                candidate = sigma - phi / dphi
            if not lo < candidate < hi:
                candidate = 0.5 * (lo + hi)
            sigma = candidate

        raise SubproblemError(
            f"secular iteration did not converge in {self.max_iters} iterations "
            f"(bracket [{lo:.3e}, {hi:.3e}])",
            factorizations=self.factorizations,
            flops=self.flops,
            dense_flops=self.dense_flops,
        )


def solve_q2(
    g: Vector,
    B: Matrix,
    lam: float,
    theta: float = 0.5,
    *,
    secular_tol: float = 1e-8,
    max_iters: int = 100,
    counter: FlopCounter | None = None,
) -> SubproblemResult:
    """Minimize g's + 1/2 s'Bs + (lambda/3)||s||^3 through a sequence of factorizations.

    Args:
        g: Model gradient
        B: Symmetric model Hessian, dense or sparse
        lam: Regularization parameter (> 0)
        theta: Inner stopping constant (>= 0); theta = 0 solves to secular_tol only
        secular_tol: Required |sigma - lambda ||s|| | relative to 1 + sigma
        max_iters: Secular iteration cap
        counter: Optional shadow flop counter

    Raises:
        InvalidArgumentError: on a non-positive lambda, negative theta or shape mismatch
        SubproblemError: when the iteration cap is exceeded
    """
    g = np.asarray(g, dtype=float)
    if not lam > 0.0:
        raise InvalidArgumentError(f"regularization parameter must be positive, got {lam}")
    if theta < 0.0:
        raise InvalidArgumentError(f"theta must be nonnegative, got {theta}")
    if g.ndim != 1 or B.shape != (g.shape[0], g.shape[0]):
        raise InvalidArgumentError(f"Hessian shape {B.shape} does not match gradient {g.shape}")
    return _SecularSolver(g, B, lam, theta, secular_tol, max_iters, counter).run()


def solve_q2_smallscale_oracle(
    g: Vector,
    B: Matrix,
    lam: float,
    grid_radius: float,
    grid_step: float,
    *,
    center: Vector | None = None,
) -> Vector:
    """Exhaustive grid search of the cubic model over the box center + [-radius, radius]^dim.

    Only meant as a reference for small problems (dim <= 3). ``center``
    defaults to the origin.
    """
    g = np.asarray(g, dtype=float)
    dim = g.shape[0]
    if dim > ORACLE_MAX_DIM:
        raise InvalidArgumentError(f"grid oracle supports dim <= {ORACLE_MAX_DIM}, got {dim}")
    if grid_radius <= 0.0 or grid_step <= 0.0:
        raise InvalidArgumentError("grid radius and step must be positive")
    B = np.asarray(B.toarray() if hasattr(B, "toarray") else B, dtype=float)

    origin = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    if origin.shape != (dim,):
        raise InvalidArgumentError(f"box center must have length {dim}, got {origin.shape}")
    count = int(round(2.0 * grid_radius / grid_step)) + 1
    offsets = np.linspace(-grid_radius, grid_radius, count)
    axes = [origin[i] + offsets for i in range(dim)]

    best_value = math.inf
    best_point = np.zeros(dim)
    # Vectorize over the last coordinate, loop over the others.
    for head in itertools.product(*axes[:-1]):
        points = np.empty((count, dim))
        points[:, : dim - 1] = head
        points[:, dim - 1] = axes[-1]
        values = (
            points @ g
            + 0.5 * np.einsum("ij,jk,ik->i", points, B, points)
            + lam / 3.0 * np.linalg.norm(points, axis=1) ** 3
        )
        idx = int(np.argmin(values))
        if values[idx] < best_value:
            best_value = float(values[idx])
            best_point = points[idx].copy()
    return best_point
