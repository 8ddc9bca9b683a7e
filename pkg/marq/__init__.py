"""
marq - adaptive regularization of order q with multilevel recursion
"""

from .__version__ import __version__
from .cli.main import main
from .config import SolverConfig
from .core import MultilevelSolver, arq_minimize, marq_minimize

__all__ = [
    "MultilevelSolver",
    "SolverConfig",
    "__version__",
    "arq_minimize",
    "main",
    "marq_minimize",
]
