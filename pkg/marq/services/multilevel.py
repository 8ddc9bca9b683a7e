"""Grid transfers, corrected lower-level models and the descend test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from marq.exceptions import InvalidArgumentError
from marq.models.oracle import Matrix, ObjectiveOracle, Vector
from marq.models.regularized import check_order
from marq.models.transfer import TransferPair

# Full weighting: R = P' / FULL_WEIGHTING_ALPHA
FULL_WEIGHTING_ALPHA = 4.0

FIRST_ORDER_RTOL = 1e-12
SECOND_ORDER_TOL = 1e-10


def _prolongation_1d(n_coarse: int) -> sp.csr_matrix:
    """Linear interpolation from n_coarse to 2*n_coarse interior points.

    Coarse point a sits on fine point 2a+1 (0-based); the weight toward the
    right Dirichlet boundary is dropped, not renormalized.
    """
    n_fine = 2 * n_coarse
    rows, cols, vals = [], [], []
    for a in range(n_coarse):
        for offset, weight in ((0, 0.5), (1, 1.0), (2, 0.5)):
            row = 2 * a + offset
            if row < n_fine:
                rows.append(row)
                cols.append(a)
                vals.append(weight)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_fine, n_coarse))


def build_grid_transfer(n1d_coarse: int) -> TransferPair:
    """Nine-point prolongation and full-weighting restriction between nested grids.

    The coarse grid has n1d_coarse^2 interior points and the fine grid
    (2*n1d_coarse)^2, both column-stacked.
    """
    if n1d_coarse < 1:
        raise InvalidArgumentError(f"coarse grid needs at least one point per side, got {n1d_coarse}")
    p1 = _prolongation_1d(n1d_coarse)
    P = sp.kron(p1, p1, format="csr")
    R = sp.csr_matrix(P.T) / FULL_WEIGHTING_ALPHA
    # ||kron(A, A)||_2 = ||A||_2^2
    p1_norm = float(np.linalg.norm(p1.toarray(), 2))
    p_norm = p1_norm**2
    return TransferPair(
        P=P,
        R=sp.csr_matrix(R),
        alpha=FULL_WEIGHTING_ALPHA,
        p_norm=p_norm,
        r_norm=p_norm / FULL_WEIGHTING_ALPHA,
    )


def _add(a: Matrix, b: Matrix) -> Matrix:
    if sp.issparse(a) and sp.issparse(b):
        return sp.csr_matrix(a + b)
    return np.asarray(_dense(a) + _dense(b))


def _dense(a: Matrix) -> np.ndarray:
    return a.toarray() if sp.issparse(a) else np.asarray(a)


def _galerkin(R: Matrix, B: Matrix, P: Matrix) -> Matrix:
    """R B P, kept sparse when B is sparse."""
    RB = R @ B
    if sp.issparse(RB):
        return sp.csr_matrix(RB @ P)
    return np.asarray((P.T @ np.asarray(RB).T).T)


@dataclass(frozen=True)
class CoarseModel:
    """Lower-level objective plus first (and second) order coherence corrections.

    In displacement form, with y = x0H + s:

        m(s) = f_H(y) + v's (+ 1/2 s'Ms when q = 2)
    """

    coarse_oracle: ObjectiveOracle
    x0H: Vector
    v: Vector
    M: Matrix | None
    q: int

    @property
    def dim(self) -> int:
        return self.coarse_oracle.dim

    def _check(self, s: Vector) -> None:
        if s.ndim != 1 or s.shape[0] != self.dim:
            raise InvalidArgumentError(
                f"coarse displacement of shape {s.shape} does not match dimension {self.dim}"
            )

    def as_oracle(self, name: str | None = None) -> ObjectiveOracle:
        """The model as an objective in absolute coarse coordinates y."""
        eval_hess = None
        if self.q == 2 and self.coarse_oracle.has_hessian:
            eval_hess = lambda y: coarse_hess(self, y - self.x0H)  # noqa: E731
        return ObjectiveOracle(
            dim=self.dim,
            eval_f=lambda y: coarse_value(self, y - self.x0H),
            eval_grad=lambda y: coarse_grad(self, y - self.x0H),
            eval_hess=eval_hess,
            name=name or f"corrected {self.coarse_oracle.name}",
        )


def build_coarse_model(
    fine_g: Vector,
    fine_B: Matrix | None,
    x_fine: Vector,
    pair: TransferPair,
    coarse_oracle: ObjectiveOracle,
    q: int,
) -> CoarseModel:
    """Correct the lower-level objective so its derivatives at R x match the restricted fine ones."""
    check_order(q)
    if x_fine.shape != (pair.n_fine,) or fine_g.shape != (pair.n_fine,):
        raise InvalidArgumentError(
            f"fine vectors must have length {pair.n_fine}, got {x_fine.shape} and {fine_g.shape}"
        )
    if coarse_oracle.dim != pair.n_coarse:
        raise InvalidArgumentError(
            f"coarse objective has dimension {coarse_oracle.dim}, transfer expects {pair.n_coarse}"
        )

    x0H = np.asarray(pair.restrict(x_fine), dtype=float)
    v = np.asarray(pair.restrict(fine_g), dtype=float) - coarse_oracle.grad(x0H)
    M = None
    if q == 2:
        if fine_B is None:
            raise InvalidArgumentError("order-2 coarse model requires the fine Hessian")
        galerkin = _galerkin(pair.R, fine_B, pair.P)
        coarse_B = coarse_oracle.hess(x0H)
        M = _add(galerkin, -coarse_B)
    return CoarseModel(coarse_oracle=coarse_oracle, x0H=x0H, v=v, M=M, q=q)


def coarse_value(cm: CoarseModel, s: Vector) -> float:
    cm._check(s)
    value = cm.coarse_oracle.f(cm.x0H + s) + float(cm.v @ s)
    if cm.q == 2:
        value += 0.5 * float(s @ (cm.M @ s))
    return value


def coarse_grad(cm: CoarseModel, s: Vector) -> Vector:
    cm._check(s)
    grad = cm.coarse_oracle.grad(cm.x0H + s) + cm.v
    if cm.q == 2:
        grad = grad + np.asarray(cm.M @ s).ravel()
    return grad


def coarse_hess(cm: CoarseModel, s: Vector) -> Matrix:
    cm._check(s)
    if cm.q != 2:
        raise InvalidArgumentError("order-1 coarse models carry no Hessian")
    return _add(cm.coarse_oracle.hess(cm.x0H + s), cm.M)


def should_descend(fine_g: Vector, R: Matrix, kappa_H: float, eps_H: float) -> bool:
    """Whether the restricted gradient is large enough for a coarse step to pay off."""
    restricted = float(np.linalg.norm(R @ fine_g))
    return restricted >= kappa_H * float(np.linalg.norm(fine_g)) and restricted > eps_H


def coherence_residuals(
    cm: CoarseModel,
    fine_g: Vector,
    fine_B: Matrix | None,
    pair: TransferPair,
    directions: int = 20,
    seed: int = 0,
) -> dict[str, tuple[float, float]]:
    """Coherence residuals of a freshly built coarse model, as {check: (value, bound)}.

    First order: ||grad m(0) - R g|| against 1e-12 (1 + ||g||). Second order
    (q = 2): the worst |s'(hess m(0) - R B P)s| / ||s||^2 over random s against 1e-10.
    """
    zero = np.zeros(cm.dim)
    restricted = pair.restrict(fine_g)
    checks = {
        "first_order": (
            float(np.linalg.norm(coarse_grad(cm, zero) - restricted)),
            FIRST_ORDER_RTOL * (1.0 + float(np.linalg.norm(fine_g))),
        )
    }
    if cm.q == 2 and fine_B is not None:
        H0 = coarse_hess(cm, zero)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(directions):
            s = rng.standard_normal(cm.dim)
            model_form = float(s @ (H0 @ s))
            galerkin_form = float(s @ pair.restrict(fine_B @ pair.prolong(s)))
            worst = max(worst, abs(model_form - galerkin_form) / float(s @ s))
        checks["second_order"] = (worst, SECOND_ORDER_TOL)
    return checks
