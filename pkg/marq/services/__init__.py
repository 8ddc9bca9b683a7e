from .factorization import FlopCounter, factorize_shifted
from .metrics import aggregate, compare_methods, save_ratio
from .multilevel import CoarseModel, build_coarse_model, build_grid_transfer
from .subproblem import SubproblemResult, solve_q1, solve_q2

__all__ = [
    "CoarseModel",
    "FlopCounter",
    "SubproblemResult",
    "aggregate",
    "build_coarse_model",
    "build_grid_transfer",
    "compare_methods",
    "factorize_shifted",
    "save_ratio",
    "solve_q1",
    "solve_q2",
]
