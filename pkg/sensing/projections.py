"""
Projections used by the alternating minimisation: onto the relaxed
equiangular-tight-frame Gram set and onto row-kappa-sparse matrices.
"""
import numpy as np

from sensing.core import as_dense
from sensing.errors import InvalidDimensionError, InvalidParameterError
from sensing.models.matrices import MatrixLike, SparseSensingMatrix, TargetGram


def clip_gram(g: np.ndarray, xi: float) -> np.ndarray:
    """Symmetrise, clip off-diagonals to [-xi, xi], set the diagonal to 1; no validation"""
    out = np.clip((g + g.T) / 2.0, -xi, xi)
    np.fill_diagonal(out, 1.0)
    return out


def keep_largest(z: np.ndarray, kappa: int) -> np.ndarray:
    """
    Zero all but the kappa largest-magnitude entries of each row; no validation.

    The stable sort keeps the lowest column index among equal magnitudes.
    """
    if kappa >= z.shape[1]:
        return z.copy()
    order = np.argsort(-np.abs(z), axis=1, kind="stable")
    mask = np.zeros(z.shape, dtype=bool)
    np.put_along_axis(mask, order[:, :kappa], True, axis=1)
    return np.where(mask, z, 0.0)


def project_gram(g_in: MatrixLike, xi: float) -> TargetGram:
    """
    Orthogonal projection onto {G symmetric : diag(G) = 1, |G_ij| <= xi}.

    Each off-diagonal entry g becomes sign(g) * min(|g|, xi). The input is
    symmetrised first; the result is idempotent under re-projection.

    Raises:
        InvalidDimensionError: g_in is not square
        InvalidParameterError: xi outside [0, 1)
    """
    g = as_dense(g_in, "g_in")
    if g.shape[0] != g.shape[1]:
        raise InvalidDimensionError(f"Gram input must be square, got shape {g.shape}")
    if not 0.0 <= xi < 1.0:
        raise InvalidParameterError(f"xi must lie in [0, 1), got {xi}")
    return TargetGram(clip_gram(g, xi), float(xi))


def project_row_sparse(z: MatrixLike, kappa: int) -> SparseSensingMatrix:
    """
    Euclidean projection onto matrices with at most kappa non-zeros per row.

    Ties in magnitude keep the lowest column index, so the result is
    deterministic.

    Raises:
        InvalidParameterError: kappa outside [1, cols(z)]
    """
    z = as_dense(z, "z")
    if isinstance(kappa, bool) or int(kappa) != kappa or not 1 <= kappa <= z.shape[1]:
        raise InvalidParameterError(f"kappa must lie in [1, {z.shape[1]}], got {kappa}")
    return SparseSensingMatrix(keep_largest(z, int(kappa)), int(kappa))
