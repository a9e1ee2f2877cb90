"""
Matrix primitives shared by the designer, the recovery code and benchmarks:
base matrices, coherence metrics and the equivalent Gram.
"""
import math
from typing import Optional

import numpy as np
from scipy import fft

from sensing.errors import InvalidDimensionError, ZeroColumnError
from sensing.models.matrices import CoherenceReport, MatrixLike, entries_of
from sensing.utils.rng import stream

# Columns with a smaller Euclidean norm count as zero
ZERO_COLUMN_NORM = 1e-14


def as_dense(values, name: str = "matrix") -> np.ndarray:
    """
    Validate and convert to a DenseMatrix (2-D float64 ndarray).

    Raises:
        InvalidDimensionError: not two-dimensional, empty, or with NaN or Inf entries
    """
    arr = np.asarray(entries_of(values), dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidDimensionError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidDimensionError(f"{name} contains NaN or Inf entries")
    return arr


def _check_dimension(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {n}")
    return int(n)


def make_identity_base(n: int) -> np.ndarray:
    """n x n identity base matrix A"""
    return np.eye(_check_dimension(n))


def make_dct_base(n: int) -> np.ndarray:
    """
    Orthonormal type-II DCT matrix.

    Row 0 is 1/sqrt(n); row k > 0, column j is
    sqrt(2/n) * cos(pi * (2j + 1) * k / (2n)). The matrix is materialised,
    so A @ x equals ``scipy.fft.dct(x, norm="ortho")``.
    """
    n = _check_dimension(n)
    return fft.dct(np.eye(n), type=2, norm="ortho", axis=0)


def welch_bound(m: int, l: int) -> float:
    """Lower bound on the coherence of l columns in R^m; 0 unless l > m >= 1"""
    if m < 1 or l <= m:
        return 0.0
    return math.sqrt((l - m) / (m * (l - 1)))


def mutual_coherence(q: MatrixLike) -> CoherenceReport:
    """
    Largest absolute normalised inner product between distinct columns.

    Raises:
        InvalidDimensionError: fewer than two columns
        ZeroColumnError: a column with norm below ZERO_COLUMN_NORM
    """
    q = as_dense(q, "q")
    rows, cols = q.shape
    if cols < 2:
        raise InvalidDimensionError(f"coherence needs at least 2 columns, got {cols}")

    norms = np.linalg.norm(q, axis=0)
    zero = np.flatnonzero(norms < ZERO_COLUMN_NORM)
    if zero.size:
        raise ZeroColumnError(int(zero[0]))

    normalized = q / norms
    gram = np.abs(normalized.T @ normalized)
    np.fill_diagonal(gram, 0.0)
    mu = min(float(gram.max()), 1.0)
    return CoherenceReport(mu=mu, welch=welch_bound(rows, cols), column_count=cols, row_count=rows)


def gram_of(b: np.ndarray) -> np.ndarray:
    """Symmetrised b^T b; no validation"""
    g = b.T @ b
    return (g + g.T) / 2.0


def equivalent_gram(phi: MatrixLike, psi: MatrixLike) -> np.ndarray:
    """
    Psi^T Phi^T Phi Psi, symmetrised as (B + B^T) / 2.

    Raises:
        InvalidDimensionError: columns of phi differ from rows of psi
    """
    phi = as_dense(phi, "phi")
    psi = as_dense(psi, "psi")
    if phi.shape[1] != psi.shape[0]:
        raise InvalidDimensionError(
            f"phi has {phi.shape[1]} columns but psi has {psi.shape[0]} rows"
        )
    return gram_of(phi @ psi)


def equivalent_coherence(phi: MatrixLike, psi: MatrixLike, base: Optional[MatrixLike] = None) -> CoherenceReport:
    """Coherence of the equivalent dictionary Phi A Psi (A omitted means identity)"""
    phi = as_dense(phi, "phi")
    if base is not None:
        phi = phi @ as_dense(base, "base")
    psi = as_dense(psi, "psi")
    if phi.shape[1] != psi.shape[0]:
        raise InvalidDimensionError(
            f"phi has {phi.shape[1]} columns but psi has {psi.shape[0]} rows"
        )
    return mutual_coherence(phi @ psi)


def make_dictionary(n: int, l: int, seed: int) -> np.ndarray:
    """Synthetic N x L dictionary: standard-normal entries, unit-norm columns"""
    n, l = _check_dimension(n), _check_dimension(l)
    psi = stream(seed, "dictionary").standard_normal((n, l))
    return psi / np.linalg.norm(psi, axis=0)
