"""Benchmark objectives.

- grid: the 2-D nonlinear elliptic problem -Laplace(u) + exp(u) = g on nested grids
- analytic: small closed-form test functions
"""

from .grid import GridProblem, ProblemDescriptor, assemble, build_hierarchy, objective_oracle

__all__ = ["GridProblem", "ProblemDescriptor", "assemble", "build_hierarchy", "objective_oracle"]
