"""Transfer operators and level hierarchies"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from marq.exceptions import InvalidArgumentError
from marq.models.oracle import ObjectiveOracle


@dataclass(frozen=True)
class TransferPair:
    """Prolongation P (fine x coarse) and restriction R (coarse x fine) with P = alpha R'.

    ``p_norm`` and ``r_norm`` are the spectral norms; r_norm is the kappa_R
    bound used by the runtime diagnostics.
    """

    P: sp.csr_matrix
    R: sp.csr_matrix
    alpha: float
    p_norm: float
    r_norm: float

    def __post_init__(self):
        n_fine, n_coarse = self.P.shape
        if self.R.shape != (n_coarse, n_fine):
            raise InvalidArgumentError(
                f"restriction shape {self.R.shape} does not match prolongation {self.P.shape}"
            )
        if self.alpha <= 0.0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")

    @property
    def n_fine(self) -> int:
        return self.P.shape[0]

    @property
    def n_coarse(self) -> int:
        return self.P.shape[1]

    def adjointness_error(self) -> float:
        """max |P - alpha R'| entrywise; zero for a consistent pair."""
        diff = (self.P - self.alpha * self.R.T).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    def prolong(self, v: np.ndarray) -> np.ndarray:
        return self.P @ v

    def restrict(self, v: np.ndarray) -> np.ndarray:
        return self.R @ v

    @classmethod
    def identity(cls, n: int) -> TransferPair:
        """P = R = I (alpha = 1): the coarse level is a copy of the fine one."""
        eye = sp.identity(n, format="csr")
        return cls(P=eye, R=eye.copy(), alpha=1.0, p_norm=1.0, r_norm=1.0)


@dataclass(frozen=True)
class Level:
    """One level of a hierarchy: its objective and the transfer pair to the level below."""

    index: int  # 1 = coarsest
    oracle: ObjectiveOracle
    transfer: TransferPair | None = None  # None on the coarsest level

    @property
    def dim(self) -> int:
        return self.oracle.dim


@dataclass(frozen=True)
class LevelHierarchy:
    """Levels ordered coarsest first; ``levels[l - 1]`` is level l."""

    levels: tuple[Level, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.levels:
            raise InvalidArgumentError("a hierarchy needs at least one level")
        for position, level in enumerate(self.levels, start=1):
            if level.index != position:
                raise InvalidArgumentError(
                    f"level at position {position} has index {level.index}"
                )
            if position == 1:
                continue
            if level.transfer is None:
                raise InvalidArgumentError(f"level {position} has no transfer to level {position - 1}")
            below = self.levels[position - 2]
            if level.transfer.n_fine != level.dim or level.transfer.n_coarse != below.dim:
                raise InvalidArgumentError(
                    f"transfer between levels {position} and {position - 1} has shape "
                    f"{level.transfer.P.shape}, expected ({level.dim}, {below.dim})"
                )

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def top(self) -> Level:
        return self.levels[-1]

    def level(self, index: int) -> Level:
        return self.levels[index - 1]

    def dims(self) -> list[int]:
        """Dimensions from the top level down."""
        return [level.dim for level in reversed(self.levels)]

    def truncated(self, depth: int) -> LevelHierarchy:
        """Keep only the ``depth`` finest levels (depth 1 = the top level alone)."""
        if not 1 <= depth <= self.depth:
            raise InvalidArgumentError(f"depth must lie in [1, {self.depth}], got {depth}")
        kept = self.levels[self.depth - depth :]
        renumbered = []
        for position, level in enumerate(kept, start=1):
            transfer = level.transfer if position > 1 else None
            renumbered.append(Level(index=position, oracle=level.oracle, transfer=transfer))
        return LevelHierarchy(levels=tuple(renumbered), metadata=dict(self.metadata))

    @classmethod
    def single(cls, oracle: ObjectiveOracle) -> LevelHierarchy:
        return cls(levels=(Level(index=1, oracle=oracle),))
