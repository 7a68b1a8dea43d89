"""
Dense matrix kernel.

Every matrix in the toolkit is a two-dimensional float64 numpy array. The
spectral routines only ever return the left-singular structure (U, sigma) of
a representation, computed from the d x d Gram matrix so the cost does not
grow with the number of collected samples.
"""
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np

from svdunlearn.core.exceptions import (
    AsymmetricMatrixException,
    ConvergenceException,
    NonFiniteValueException,
    ShapeMismatchException,
    ValidationException,
)

Matrix = np.ndarray

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOLERANCE = 1e-10

SvdRoute = Literal["gram", "direct"]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthonormal basis (columns) with non-negative singular values, descending."""
    basis: Matrix
    singular_values: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a symmetric matrix, eigenvalues descending."""
    basis: Matrix
    eigenvalues: np.ndarray
    sweeps: int = 0


def as_matrix(values, operation: str = "as_matrix") -> Matrix:
    """Coerce to a finite 2-D float64 array."""
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2:
        raise ShapeMismatchException(operation, "2-D matrix", matrix.shape)
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteValueException(operation)
    return matrix


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Standard matrix product with shape and finiteness checks."""
    a = as_matrix(a, "matmul")
    b = as_matrix(b, "matmul")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchException("matmul", f"({a.shape[0]}, {a.shape[1]}) x ({a.shape[1]}, *)", b.shape)
    product = a @ b
    if not np.all(np.isfinite(product)):
        raise NonFiniteValueException("matmul")
    return product


def _off_diagonal_norm(a: Matrix) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def symmetric_eigen(
        g: Matrix,
        tolerance: float = JACOBI_TOLERANCE,
        max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> EigenDecomposition:
    """
    Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Args:
        g: Square symmetric matrix
        tolerance: Convergence threshold on the off-diagonal Frobenius norm,
            relative to max(1, ||g||_F)
        max_sweeps: Maximum number of full cyclic sweeps

    Returns:
        EigenDecomposition with eigenvalues sorted descending
    """
    a = as_matrix(g, "symmetric_eigen").copy()
    n, m = a.shape
    if n != m:
        raise ShapeMismatchException("symmetric_eigen", "square matrix", a.shape)
    if n == 0:
        raise ValidationException("symmetric_eigen: empty matrix")

    scale = max(1.0, float(np.max(np.abs(a))))
    deviation = float(np.max(np.abs(a - a.T)))
    if deviation > SYMMETRY_TOLERANCE * scale:
        raise AsymmetricMatrixException(deviation)
    a = 0.5 * (a + a.T)

    threshold = tolerance * max(1.0, float(np.linalg.norm(a)))
    v = np.eye(n)
    sweeps = 0
    off = _off_diagonal_norm(a)
    while off >= threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceException("Jacobi eigensolver", sweeps, off)
        for p in range(n - 1):
            for q in range(p + 1, n):
                a_pq = a[p, q]
                if a_pq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * a_pq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
        sweeps += 1
        off = _off_diagonal_norm(a)

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return EigenDecomposition(basis=v[:, order], eigenvalues=eigenvalues[order], sweeps=sweeps)


def _complete_basis(columns: Matrix, dim: int) -> Matrix:
    """Extend orthonormal columns to a full orthonormal basis of R^dim."""
    rank = columns.shape[1]
    if rank == dim:
        return columns
    q, _ = np.linalg.qr(np.hstack([columns, np.eye(dim)]))
    q = q[:, :dim]
    q[:, :rank] = columns
    return q


def _hestenes_sweeps(work: Matrix, tolerance: float, max_sweeps: int) -> Matrix:
    """
    Rotate the columns of `work` in place until they are mutually orthogonal.

    Returns the accumulated right rotation V, so that the input equals work V^T.
    """
    cols = work.shape[1]
    v = np.eye(cols)
    negligible = (np.finfo(float).eps * float(np.linalg.norm(work))) ** 2
    worst = 0.0
    for _ in range(max_sweeps):
        worst = 0.0
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                alpha = float(work[:, i] @ work[:, i])
                beta = float(work[:, j] @ work[:, j])
                if alpha <= negligible or beta <= negligible:
                    continue
                gamma = float(work[:, i] @ work[:, j])
                coupling = abs(gamma) / np.sqrt(alpha * beta)
                worst = max(worst, coupling)
                if coupling < tolerance:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for target in (work, v):
                    col_i = target[:, i].copy()
                    col_j = target[:, j].copy()
                    target[:, i] = c * col_i - s * col_j
                    target[:, j] = s * col_i + c * col_j
        if worst < tolerance:
            return v
    raise ConvergenceException("one-sided Jacobi SVD", max_sweeps, worst)


def jacobi_svd(
        a: Matrix,
        tolerance: float = JACOBI_TOLERANCE,
        max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> Tuple[Matrix, np.ndarray]:
    """
    One-sided (Hestenes) Jacobi SVD.

    Orthogonalizes columns by plane rotations; wide matrices are handled
    through their transpose so there are never more columns than rows.
    Returns the left singular vectors for the min(rows, cols) singular values
    and the singular values themselves, descending. Left vectors belonging to
    zero singular values are completed to an orthonormal set.
    """
    matrix = as_matrix(a, "jacobi_svd")
    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        raise ValidationException("jacobi_svd: empty matrix")
    rank = min(rows, cols)

    if cols > rows:
        # a^T = W V^T with orthogonal columns in W: the left vectors of a are V
        work = matrix.T.copy()
        v = _hestenes_sweeps(work, tolerance, max_sweeps)
        norms = np.linalg.norm(work, axis=0)
        order = np.argsort(-norms, kind="stable")
        sigma = norms[order]
        cutoff = np.finfo(float).eps * cols * sigma[0]
        return v[:, order], np.where(sigma > cutoff, sigma, 0.0)

    work = matrix.copy()
    _hestenes_sweeps(work, tolerance, max_sweeps)
    norms = np.linalg.norm(work, axis=0)
    order = np.argsort(-norms, kind="stable")
    sigma = norms[order][:rank]
    cutoff = np.finfo(float).eps * max(rows, cols) * (sigma[0] if sigma.size else 0.0)
    nonzero = [idx for idx in order[:rank] if norms[idx] > cutoff]
    left = work[:, nonzero] / norms[nonzero]
    left = _complete_basis(left, rows)[:, :rank]
    sigma = np.where(sigma > cutoff, sigma, 0.0)
    return left, sigma


class GramAccumulator:
    """Streams representation blocks into the d x d Gram matrix R^T R."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValidationException("Gram accumulator needs a feature dimension >= 1")
        self.dim = dim
        self.rows = 0
        self.gram = np.zeros((dim, dim))

    def update(self, block: Matrix) -> "GramAccumulator":
        block = as_matrix(block, "GramAccumulator.update")
        if block.shape[1] != self.dim:
            raise ShapeMismatchException("GramAccumulator.update", f"(*, {self.dim})", block.shape)
        self.gram += block.T @ block
        self.rows += block.shape[0]
        return self

    def decompose(self) -> SpectralDecomposition:
        if self.rows == 0:
            raise ValidationException("Gram accumulator received no rows")
        eigen = symmetric_eigen(self.gram)
        eigenvalues = eigen.eigenvalues
        # rounding noise on the null space of R^T R
        cutoff = 10.0 * max(self.dim, self.rows) * np.finfo(float).eps * max(float(eigenvalues[0]), 0.0)
        eigenvalues = np.where(eigenvalues > cutoff, eigenvalues, 0.0)
        return SpectralDecomposition(basis=eigen.basis, singular_values=np.sqrt(eigenvalues))


def svd_spectral(representation: Matrix, route: SvdRoute = "gram") -> SpectralDecomposition:
    """
    Left-singular basis and singular values of a K x d representation matrix.

    Only U (d x d) and sigma are returned. The default route eigendecomposes
    the Gram matrix; the direct route runs one-sided Jacobi on R^T.
    """
    rep = np.asarray(representation, dtype=np.float64)
    if rep.ndim != 2:
        raise ShapeMismatchException("svd_spectral", "2-D representation", rep.shape)
    if rep.shape[1] == 0:
        raise ValidationException("svd_spectral: feature dimension d must be >= 1")
    if rep.shape[0] == 0:
        raise ValidationException("svd_spectral: representation needs at least one row")
    if not np.all(np.isfinite(rep)):
        raise NonFiniteValueException("svd_spectral")

    if route == "gram":
        return GramAccumulator(rep.shape[1]).update(rep).decompose()
    if route == "direct":
        dim = rep.shape[1]
        left, sigma = jacobi_svd(rep.T)
        basis = _complete_basis(left, dim)
        padded = np.zeros(dim)
        padded[:sigma.shape[0]] = sigma
        return SpectralDecomposition(basis=basis, singular_values=padded)
    raise ValidationException(f"Unknown SVD route '{route}'")


def scaled_projector(basis: Matrix, weights: np.ndarray) -> Matrix:
    """U diag(w) U^T, symmetrized."""
    projector = (basis * weights) @ basis.T
    return 0.5 * (projector + projector.T)


def subspace_distance(a: Matrix, b: Matrix, rank: Optional[int] = None) -> float:
    """Frobenius distance between the projectors onto the leading `rank` columns."""
    if rank is not None:
        a = a[:, :rank]
        b = b[:, :rank]
    return float(np.linalg.norm(a @ a.T - b @ b.T))
