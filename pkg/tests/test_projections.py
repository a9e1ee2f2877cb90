import itertools

import numpy as np
import pytest

from sensing.errors import InvalidDimensionError, InvalidParameterError
from sensing.models.matrices import SparseSensingMatrix, TargetGram
from sensing.projections import project_gram, project_row_sparse


def brute_force_distance(z, kappa):
    """Smallest ||z - W||_F over W keeping any kappa entries per row"""
    total = 0.0
    for row in z:
        best = min(
            sum(row[j] ** 2 for j in range(len(row)) if j not in keep)
            for keep in itertools.combinations(range(len(row)), kappa)
        )
        total += best
    return np.sqrt(total)


class TestProjectGram:
    """Test cases for the relaxed Gram projection"""

    def test_clips_positive(self):
        """Off-diagonals clipped to xi, diagonal reset to 1"""
        out = project_gram(np.array([[2.0, 0.5], [0.5, 2.0]]), 0.2)
        assert isinstance(out, TargetGram)
        assert np.allclose(out.entries, [[1.0, 0.2], [0.2, 1.0]])

    def test_preserves_sign(self):
        """Negative entries clip to -xi"""
        out = project_gram(np.array([[1.0, -0.5], [-0.5, 1.0]]), 0.2)
        assert np.allclose(out.entries, [[1.0, -0.2], [-0.2, 1.0]])

    def test_xi_zero_is_identity(self, rng):
        """xi = 0 maps anything to I"""
        out = project_gram(rng.standard_normal((3, 3)), 0.0)
        assert np.array_equal(out.entries, np.eye(3))

    def test_entries_inside_bound_unchanged(self):
        """Entries already within [-xi, xi] are kept"""
        g = np.array([[5.0, 0.1, -0.05], [0.1, 5.0, 0.0], [-0.05, 0.0, 5.0]])
        out = project_gram(g, 0.2).entries
        assert out[0, 1] == 0.1
        assert out[0, 2] == -0.05

    def test_idempotent(self, rng):
        """Re-projection changes nothing"""
        once = project_gram(rng.standard_normal((6, 6)), 0.3)
        twice = project_gram(once.entries, 0.3)
        assert np.array_equal(once.entries, twice.entries)

    def test_symmetrises_input(self, rng):
        """Asymmetric input yields an exactly symmetric output"""
        out = project_gram(rng.standard_normal((5, 5)), 0.9).entries
        assert np.array_equal(out, out.T)

    def test_nearest_point(self, rng):
        """No feasible perturbation of the output is closer to a symmetric input"""
        g = rng.standard_normal((4, 4))
        g = (g + g.T) / 2
        p = project_gram(g, 0.3).entries
        base = np.linalg.norm(g - p)
        for _ in range(50):
            w = rng.uniform(-0.3, 0.3, size=(4, 4))
            w = (w + w.T) / 2
            np.fill_diagonal(w, 1.0)
            assert base <= np.linalg.norm(g - w) + 1e-12

    def test_non_square(self):
        """Non-square input is rejected"""
        with pytest.raises(InvalidDimensionError):
            project_gram(np.ones((2, 3)), 0.1)

    @pytest.mark.parametrize("xi", [-0.1, 1.0, 1.5])
    def test_xi_out_of_range(self, xi):
        """xi outside [0, 1) is rejected"""
        with pytest.raises(InvalidParameterError):
            project_gram(np.eye(2), xi)


class TestProjectRowSparse:
    """Test cases for the row-sparse projection"""

    def test_keeps_largest(self):
        """Two largest magnitudes kept per row"""
        out = project_row_sparse(np.array([[3.0, -1.0, 2.0], [0.0, 5.0, -4.0]]), 2)
        assert isinstance(out, SparseSensingMatrix)
        assert np.array_equal(out.entries, [[3.0, 0.0, 2.0], [0.0, 5.0, -4.0]])

    def test_ties_keep_lowest_index(self):
        """Equal magnitudes resolve toward the lowest column"""
        out = project_row_sparse(np.array([[1.0, 1.0, 1.0]]), 2)
        assert np.array_equal(out.entries, [[1.0, 1.0, 0.0]])

    def test_ties_with_signs(self):
        """Magnitude ties ignore sign"""
        out = project_row_sparse(np.array([[-2.0, 2.0, 1.0]]), 1)
        assert np.array_equal(out.entries, [[-2.0, 0.0, 0.0]])

    def test_matches_brute_force(self, rng):
        """2x6, kappa=3: distance equals the exhaustive minimum"""
        z = rng.standard_normal((2, 6))
        out = project_row_sparse(z, 3).entries
        assert np.linalg.norm(z - out) == pytest.approx(brute_force_distance(z, 3), rel=1e-12)

    def test_optimality_oracle(self, rng):
        """Rows up to 8 long, kappa up to 4, never worse than any support choice"""
        for cols in range(2, 9):
            for kappa in range(1, min(cols, 4) + 1):
                z = rng.standard_normal((3, cols))
                out = project_row_sparse(z, kappa).entries
                assert np.linalg.norm(z - out) <= brute_force_distance(z, kappa) + 1e-12

    def test_row_budget(self, rng):
        """Every row has at most kappa non-zeros"""
        out = project_row_sparse(rng.standard_normal((10, 20)), 4).entries
        assert (np.count_nonzero(out, axis=1) <= 4).all()

    def test_full_budget_is_identity(self, rng):
        """kappa = cols leaves z unchanged"""
        z = rng.standard_normal((3, 5))
        assert np.array_equal(project_row_sparse(z, 5).entries, z)

    def test_idempotent(self, rng):
        """Projecting twice equals projecting once"""
        once = project_row_sparse(rng.standard_normal((4, 9)), 3).entries
        assert np.array_equal(project_row_sparse(once, 3).entries, once)

    @pytest.mark.parametrize("kappa", [0, 4])
    def test_kappa_out_of_range(self, kappa):
        """kappa = 0 or kappa > cols is rejected"""
        with pytest.raises(InvalidParameterError):
            project_row_sparse(np.ones((2, 3)), kappa)


class TestCarriers:
    """Test cases for matrix carrier validation"""

    def test_sparse_matrix_rejects_dense_row(self):
        """A row over budget is rejected"""
        with pytest.raises(InvalidParameterError):
            SparseSensingMatrix(np.ones((2, 3)), 2)

    def test_sparse_matrix_read_only(self):
        """Entries cannot be modified in place"""
        phi = SparseSensingMatrix(np.eye(3), 1)
        with pytest.raises(ValueError):
            phi.entries[0, 0] = 2.0

    def test_gram_rejects_asymmetry(self):
        """Target Gram must be symmetric"""
        with pytest.raises(InvalidParameterError):
            TargetGram(np.array([[1.0, 0.1], [0.0, 1.0]]), 0.2)

    def test_gram_rejects_diagonal(self):
        """Target Gram must have a unit diagonal"""
        with pytest.raises(InvalidParameterError):
            TargetGram(np.array([[2.0, 0.1], [0.1, 1.0]]), 0.2)

    def test_gram_rejects_bound(self):
        """Off-diagonals over xi are rejected"""
        with pytest.raises(InvalidParameterError):
            TargetGram(np.array([[1.0, 0.5], [0.5, 1.0]]), 0.2)
