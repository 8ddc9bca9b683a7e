"""Core AR q / MAR q iteration and post-run diagnostics."""

from .solver import MultilevelSolver, arq_minimize, marq_minimize

__all__ = ["MultilevelSolver", "arq_minimize", "marq_minimize"]
