"""
Tests for the dense matrix kernel.
"""
import numpy as np
import pytest

from svdunlearn.core.exceptions import (
    AsymmetricMatrixException,
    NonFiniteValueException,
    ShapeMismatchException,
    ValidationException,
)
from svdunlearn.core.linalg import (
    GramAccumulator,
    jacobi_svd,
    matmul,
    scaled_projector,
    subspace_distance,
    svd_spectral,
    symmetric_eigen,
)


def _triple_loop(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


class TestMatmul:
    """Tests for matmul"""

    def test_small_product(self):
        """Test a hand-computed 2x2 product."""
        result = matmul([[1, 2], [3, 4]], [[5, 6], [7, 8]])
        assert np.array_equal(result, [[19, 22], [43, 50]])

    def test_matches_triple_loop(self, rng):
        """Test agreement with the definition on random shapes."""
        for m, k, n in [(1, 1, 1), (3, 5, 2), (7, 4, 6)]:
            a = rng.standard_normal((m, k))
            b = rng.standard_normal((k, n))
            assert np.allclose(matmul(a, b), _triple_loop(a, b), atol=1e-12)

    def test_shape_mismatch(self):
        """Test that inner dimensions must agree."""
        with pytest.raises(ShapeMismatchException):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_non_finite_input(self):
        """Test that NaN inputs are rejected."""
        with pytest.raises(NonFiniteValueException):
            matmul([[np.nan]], [[1.0]])


class TestSymmetricEigen:
    """Tests for the Jacobi eigensolver"""

    def test_diagonal_matrix(self):
        """Test that eigenvalues of a diagonal matrix come back sorted."""
        eigen = symmetric_eigen(np.diag([1.0, 3.0, 2.0]))
        assert np.allclose(eigen.eigenvalues, [3.0, 2.0, 1.0])

    def test_two_by_two(self):
        """Test [[2, 1], [1, 2]] has eigenvalues 3 and 1."""
        eigen = symmetric_eigen([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(eigen.eigenvalues, [3.0, 1.0], atol=1e-12)
        assert np.isclose(abs(eigen.basis[0, 0]), 1 / np.sqrt(2))

    def test_random_reconstruction(self, rng):
        """Test V diag(lambda) V^T reproduces a random symmetric matrix."""
        a = rng.standard_normal((8, 8))
        g = a + a.T
        eigen = symmetric_eigen(g)
        rebuilt = eigen.basis @ np.diag(eigen.eigenvalues) @ eigen.basis.T
        assert np.allclose(rebuilt, g, atol=1e-9)
        assert np.allclose(eigen.basis.T @ eigen.basis, np.eye(8), atol=1e-10)
        assert np.all(np.diff(eigen.eigenvalues) <= 1e-12)

    def test_wide_spectrum_converges(self, rng):
        """Test that an SPD matrix with eigenvalues spread over four decades converges."""
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        spectrum = np.array([1.2e4, 3.1e3, 410.0, 37.0, 4.9])
        g = (q * spectrum) @ q.T
        g = 0.5 * (g + g.T)
        eigen = symmetric_eigen(g)
        assert np.allclose(eigen.eigenvalues, spectrum, rtol=1e-10)
        off = eigen.basis.T @ g @ eigen.basis - np.diag(eigen.eigenvalues)
        assert np.linalg.norm(off) < 1e-9 * np.linalg.norm(g)

    def test_asymmetric_rejected(self):
        """Test that an asymmetric matrix raises."""
        with pytest.raises(AsymmetricMatrixException):
            symmetric_eigen([[1.0, 2.0], [0.0, 1.0]])

    def test_not_square(self):
        """Test that a rectangular matrix raises."""
        with pytest.raises(ShapeMismatchException):
            symmetric_eigen(np.ones((2, 3)))


class TestJacobiSvd:
    """Tests for one-sided Jacobi SVD"""

    @pytest.mark.parametrize("shape", [(6, 3), (3, 6), (5, 5), (1, 4), (4, 1)])
    def test_singular_values_match_reference(self, rng, shape):
        """Test singular values against numpy on tall, wide and square inputs."""
        a = rng.standard_normal(shape)
        left, sigma = jacobi_svd(a)
        assert np.allclose(sigma, np.linalg.svd(a, compute_uv=False), atol=1e-10)
        assert np.allclose(left.T @ left, np.eye(left.shape[1]), atol=1e-10)

    def test_left_vectors_reconstruct(self, rng):
        """Test that U sigma spans the column space: U U^T a = a."""
        a = rng.standard_normal((6, 4))
        left, _ = jacobi_svd(a)
        assert np.allclose(left @ left.T @ a, a, atol=1e-10)

    def test_rank_deficient(self, rng):
        """Test that a rank-1 matrix yields one nonzero singular value."""
        u = rng.standard_normal((5, 1))
        v = rng.standard_normal((1, 3))
        _, sigma = jacobi_svd(u @ v)
        assert sigma[0] > 0
        assert np.all(sigma[1:] < 1e-12 * sigma[0])


class TestSvdSpectral:
    """Tests for svd_spectral"""

    def test_rank_one_example(self):
        """Test R = [[3, 0], [4, 0]] has sigma (5, 0) and e1 as leading direction."""
        spectral = svd_spectral([[3.0, 0.0], [4.0, 0.0]])
        assert np.allclose(spectral.singular_values, [5.0, 0.0], atol=1e-12)
        assert np.isclose(abs(spectral.basis[0, 0]), 1.0)

    @pytest.mark.parametrize("route", ["gram", "direct"])
    def test_orthonormal_and_descending(self, rng, route):
        """Test basis orthonormality, sigma ordering and sigma >= 0."""
        rep = rng.standard_normal((20, 6))
        spectral = svd_spectral(rep, route=route)
        assert spectral.basis.shape == (6, 6)
        assert np.allclose(spectral.basis.T @ spectral.basis, np.eye(6), atol=1e-10)
        assert np.all(np.diff(spectral.singular_values) <= 1e-12)
        assert np.all(spectral.singular_values >= 0)

    @pytest.mark.parametrize("shape", [(30, 5), (4, 9), (12, 12)])
    def test_gram_and_direct_agree(self, rng, shape):
        """Test that both routes give the same singular values."""
        rep = rng.standard_normal(shape)
        gram = svd_spectral(rep, route="gram")
        direct = svd_spectral(rep, route="direct")
        assert np.allclose(gram.singular_values, direct.singular_values, atol=1e-7)

    def test_random_column_scales(self):
        """Test both routes on 100 tall matrices whose columns are scaled by 0.1 to 30."""
        rng = np.random.default_rng(20240)
        for _ in range(100):
            rep = rng.standard_normal((300, 5)) * rng.uniform(0.1, 30.0, size=5)
            gram = svd_spectral(rep, route="gram")
            direct = svd_spectral(rep, route="direct")
            assert np.allclose(gram.singular_values, direct.singular_values, rtol=0.0, atol=1e-7)
            assert np.allclose(gram.singular_values, np.linalg.svd(rep, compute_uv=False), rtol=0.0, atol=1e-7)
            g = rep.T @ rep
            for spectral in (gram, direct):
                assert np.allclose(spectral.basis.T @ spectral.basis, np.eye(5), rtol=0.0, atol=1e-8)
                assert np.all(np.diff(spectral.singular_values) <= 0.0)
                rebuilt = (spectral.basis * spectral.singular_values ** 2) @ spectral.basis.T
                assert np.linalg.norm(rebuilt - g) <= 1e-8 * np.linalg.norm(g)

    def test_gram_reconstruction(self, rng):
        """Test U diag(sigma^2) U^T equals R^T R."""
        rep = rng.standard_normal((15, 4))
        spectral = svd_spectral(rep)
        rebuilt = spectral.basis @ np.diag(spectral.singular_values ** 2) @ spectral.basis.T
        assert np.allclose(rebuilt, rep.T @ rep, atol=1e-8)

    def test_zero_matrix(self):
        """Test that a zero representation gives zero singular values and a valid basis."""
        spectral = svd_spectral(np.zeros((3, 4)))
        assert np.all(spectral.singular_values == 0.0)
        assert np.allclose(spectral.basis.T @ spectral.basis, np.eye(4))

    def test_empty_rows_rejected(self):
        """Test that K = 0 raises."""
        with pytest.raises(ValidationException):
            svd_spectral(np.zeros((0, 3)))

    def test_unknown_route(self):
        """Test that an unknown route raises."""
        with pytest.raises(ValidationException):
            svd_spectral(np.ones((2, 2)), route="lanczos")


class TestGramAccumulator:
    """Tests for streaming Gram accumulation"""

    def test_streaming_equals_one_shot(self, rng):
        """Test that block-wise updates give the same spectrum as one block."""
        rep = rng.standard_normal((25, 5))
        accumulator = GramAccumulator(5)
        for start in range(0, 25, 7):
            accumulator.update(rep[start:start + 7])
        assert accumulator.rows == 25
        streamed = accumulator.decompose()
        whole = svd_spectral(rep)
        assert np.allclose(streamed.singular_values, whole.singular_values, atol=1e-10)

    def test_width_mismatch(self):
        """Test that a block of the wrong width raises."""
        with pytest.raises(ShapeMismatchException):
            GramAccumulator(3).update(np.ones((2, 4)))

    def test_no_rows(self):
        """Test that decomposing an empty accumulator raises."""
        with pytest.raises(ValidationException):
            GramAccumulator(2).decompose()


class TestProjectorHelpers:
    """Tests for scaled_projector and subspace_distance"""

    def test_identity_weights_give_identity(self, rng):
        """Test U I U^T = I for an orthonormal U."""
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        assert np.allclose(scaled_projector(q, np.ones(4)), np.eye(4), atol=1e-12)

    def test_subspace_distance_zero_for_same_span(self, rng):
        """Test that sign flips of basis columns do not change the distance."""
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        assert subspace_distance(q, -q, rank=2) < 1e-12
