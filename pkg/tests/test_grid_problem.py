"""Tests for the -Laplace(u) + exp(u) = g benchmark."""

import json

import numpy as np
import pytest

from marq.constants import EXP_OVERFLOW_LIMIT
from marq.exceptions import InvalidArgumentError, ObjectiveOverflowError
from marq.problems.grid import (
    ProblemDescriptor,
    assemble,
    build_hierarchy,
    grid_coordinates,
    laplacian_matrix,
    level_sizes,
    objective_oracle,
    random_init,
    rmse,
    u_star_values,
)


class TestAssembly:
    def test_laplacian_is_symmetric_positive_definite(self):
        A = laplacian_matrix(5).toarray()
        np.testing.assert_allclose(A, A.T)
        assert np.min(np.linalg.eigvalsh(A)) > 0.0

    def test_laplacian_stencil(self):
        n1d = 4
        h = 1.0 / (n1d + 1)
        A = laplacian_matrix(n1d).toarray() * h**2
        # Interior point (1, 1) has index 1 + 4 * 1 = 5 in column-stacked order.
        row = A[5]
        assert row[5] == pytest.approx(4.0)
        np.testing.assert_allclose(row[[4, 6, 1, 9]], -1.0)
        assert np.count_nonzero(row) == 5

    def test_coordinates_are_column_stacked(self):
        x, y = grid_coordinates(3)
        np.testing.assert_allclose(x[:3], [0.25, 0.5, 0.75])
        np.testing.assert_allclose(y[:3], 0.25)

    def test_u_star_vanishes_on_the_boundary(self):
        edge = np.array([0.0, 1.0, 0.5, 0.5])
        other = np.array([0.5, 0.5, 0.0, 1.0])
        np.testing.assert_allclose(u_star_values(edge, other), 0.0, atol=1e-15)

    def test_discrete_rhs_makes_u_star_the_minimizer(self, small_grid, small_grid_oracle):
        grad = small_grid_oracle.grad(small_grid.u_star)
        assert np.linalg.norm(grad) <= 1e-9 * np.linalg.norm(small_grid.g_vec)

    def test_analytic_rhs_is_close_but_not_exact(self):
        p = assemble(16, rhs="analytic")
        oracle = objective_oracle(p)
        residual = np.linalg.norm(oracle.grad(p.u_star)) / np.linalg.norm(p.g_vec)
        assert 0.0 < residual < 0.2

    def test_invalid_assembly_arguments(self):
        with pytest.raises(InvalidArgumentError):
            assemble(1)
        with pytest.raises(InvalidArgumentError):
            assemble(8, rhs="exact")


class TestObjective:
    def test_hessian_is_laplacian_plus_exp_diagonal(self, small_grid, small_grid_oracle):
        u = np.full(small_grid.n, 0.5)
        H = small_grid_oracle.hess(u).toarray()
        expected = small_grid.A.toarray() + np.exp(0.5) * np.eye(small_grid.n)
        np.testing.assert_allclose(H, expected)

    def test_gradient_matches_finite_differences(self, small_grid_oracle, rng):
        u = rng.uniform(0.0, 1.0, small_grid_oracle.dim)
        d = rng.standard_normal(small_grid_oracle.dim)
        eps = 1e-6
        fd = (small_grid_oracle.f(u + eps * d) - small_grid_oracle.f(u - eps * d)) / (2 * eps)
        assert fd == pytest.approx(small_grid_oracle.grad(u) @ d, rel=1e-5)

    def test_overflow_is_reported(self, small_grid_oracle):
        u = np.zeros(small_grid_oracle.dim)
        u[3] = EXP_OVERFLOW_LIMIT + 1.0
        with pytest.raises(ObjectiveOverflowError):
            small_grid_oracle.f(u)
        with pytest.raises(ObjectiveOverflowError):
            small_grid_oracle.grad(u)


class TestLevels:
    def test_level_sizes_coarsest_first(self):
        assert level_sizes(64, 4) == [8, 16, 32, 64]
        assert level_sizes(64, 1) == [64]

    @pytest.mark.parametrize(("n1d", "levels"), [(63, 4), (4, 3), (8, 0)])
    def test_level_sizes_rejects_bad_combinations(self, n1d, levels):
        with pytest.raises(InvalidArgumentError):
            level_sizes(n1d, levels)

    def test_hierarchy_metadata(self, three_level_hierarchy):
        assert three_level_hierarchy.dims() == [256, 64, 16]
        assert three_level_hierarchy.metadata["n1d"] == [4, 8, 16]
        assert three_level_hierarchy.metadata["problem"].n1d == 16

    def test_hierarchy_top_carries_transfer(self):
        hierarchy = build_hierarchy(8, 2)
        assert hierarchy.top.transfer.P.shape == (64, 16)


class TestInitAndError:
    def test_random_init_is_reproducible_and_bounded(self):
        first = random_init(50, 2.0, seed=5)
        np.testing.assert_array_equal(first, random_init(50, 2.0, seed=5))
        assert not np.array_equal(first, random_init(50, 2.0, seed=6))
        assert first.min() >= 0.0
        assert first.max() <= 2.0

    def test_random_init_needs_positive_amplitude(self):
        with pytest.raises(InvalidArgumentError):
            random_init(4, 0.0, seed=0)

    def test_rmse(self, small_grid):
        assert rmse(small_grid.u_star, small_grid) == 0.0
        assert rmse(small_grid.u_star + 0.5, small_grid) == pytest.approx(0.5)
        with pytest.raises(InvalidArgumentError):
            rmse(np.zeros(3), small_grid)


class TestProblemDescriptor:
    def test_defaults(self):
        d = ProblemDescriptor()
        assert (d.n1d, d.levels, d.seed, d.a, d.rhs) == (64, 4, 0, 1.0, "discrete")

    def test_save_and_load(self, temp_dir):
        path = temp_dir / "problem.json"
        ProblemDescriptor(n1d=16, levels=2, seed=9, a=0.5).save(path)

        assert json.loads(path.read_text())["seed"] == 9
        loaded = ProblemDescriptor.load(path)
        assert loaded == ProblemDescriptor(n1d=16, levels=2, seed=9, a=0.5)

    def test_unknown_keys_are_ignored(self):
        d = ProblemDescriptor.from_dict({"n1d": 8, "levels": 2, "colour": "blue"})
        assert d.n1d == 8

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            ProblemDescriptor(n1d=63, levels=4)
        with pytest.raises(InvalidArgumentError):
            ProblemDescriptor(rhs="nope")
        with pytest.raises(InvalidArgumentError):
            ProblemDescriptor(a=-1.0)

    def test_load_errors(self, temp_dir):
        with pytest.raises(InvalidArgumentError):
            ProblemDescriptor.load(temp_dir / "missing.json")
        bad = temp_dir / "bad.json"
        bad.write_text("[1, 2]")
        with pytest.raises(InvalidArgumentError):
            ProblemDescriptor.load(bad)
