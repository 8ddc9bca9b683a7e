"""Pytest fixtures for marq tests"""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from marq.config import SolverConfig
from marq.problems.analytic import convex_quartic, quadratic
from marq.problems.grid import assemble, build_hierarchy, objective_oracle


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def default_config():
    return SolverConfig()


@pytest.fixture
def spd_quadratic():
    """Diagonal SPD quadratic with known minimizer Q^{-1} b."""
    Q = np.diag([1.0, 2.0, 5.0, 10.0])
    b = np.array([1.0, -1.0, 2.0, 0.5])
    return quadratic(Q, b), np.linalg.solve(Q, b)


@pytest.fixture
def quartic():
    return convex_quartic(8, seed=3)


@pytest.fixture
def small_grid():
    """8 x 8 interior grid with the discrete right-hand side."""
    return assemble(8)


@pytest.fixture
def small_grid_oracle(small_grid):
    return objective_oracle(small_grid)


@pytest.fixture
def small_hierarchy():
    """Two-level grid hierarchy, 8 x 8 on top of 4 x 4."""
    return build_hierarchy(8, 2)


@pytest.fixture
def three_level_hierarchy():
    """16 x 16, 8 x 8 and 4 x 4 grids."""
    return build_hierarchy(16, 3)
