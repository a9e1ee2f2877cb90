"""
Orthogonal matching pursuit for K-sparse recovery.

Atoms are selected by |<d_i, r>| / ||d_i||: the equivalent dictionary
Phi Psi does not have unit-norm columns, and coherence is defined on
normalised columns as well.
"""
from typing import Optional

import numpy as np
from scipy import linalg

from sensing.core import ZERO_COLUMN_NORM, as_dense
from sensing.errors import DegenerateDictionaryError, InvalidDimensionError, InvalidParameterError
from sensing.models.matrices import MatrixLike
from sensing.models.results import RecoveryResult

# Default stopping tolerance relative to ||y||_2
RELATIVE_TOL = 1e-10


def omp(y, d: MatrixLike, k: int, tol: Optional[float] = None) -> RecoveryResult:
    """
    Greedy K-sparse recovery of y ~ d s.

    Each iteration picks the unselected column with the largest normalised
    correlation to the residual (lowest index on ties), re-fits the
    coefficients by least squares on the support and updates the residual.
    Stops after k atoms or once the residual norm drops below ``tol``
    (default 1e-10 * ||y||_2).

    Raises:
        InvalidDimensionError: y length differs from the rows of d
        InvalidParameterError: k < 1 or k > rows of d
        DegenerateDictionaryError: every column of d is zero
    """
    d = as_dense(d, "dictionary")
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    m, l = d.shape
    if y.shape[0] != m:
        raise InvalidDimensionError(f"measurement has length {y.shape[0]} but dictionary has {m} rows")
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise InvalidParameterError(f"sparsity k must be a positive integer, got {k}")
    if k > m:
        raise InvalidParameterError(f"sparsity k={k} exceeds the {m} measurements")

    norms = np.linalg.norm(d, axis=0)
    selectable = norms >= ZERO_COLUMN_NORM
    if not selectable.any():
        raise DegenerateDictionaryError("dictionary has no non-zero column")

    y_norm = float(np.linalg.norm(y))
    if tol is None:
        tol = RELATIVE_TOL * y_norm

    coefficients = np.zeros(l)
    support = []
    residual = y.copy()
    residual_norm = y_norm
    history = [residual_norm]
    solution = np.zeros(0)

    inverse_norms = np.where(selectable, 1.0 / np.where(selectable, norms, 1.0), 0.0)
    while len(support) < k and residual_norm >= tol and residual_norm > 0.0:
        scores = np.abs(d.T @ residual) * inverse_norms
        scores[~selectable] = -1.0
        scores[support] = -1.0
        best = int(np.argmax(scores))
        if scores[best] <= 0.0:
            # residual is orthogonal to every remaining atom
            break
        support.append(best)

        # gelsd: minimum-norm solution when the support is rank deficient
        solution = linalg.lstsq(d[:, support], y, lapack_driver="gelsd")[0]
        residual = y - d[:, support] @ solution
        residual_norm = float(np.linalg.norm(residual))
        history.append(residual_norm)

    if support:
        coefficients[support] = solution
    return RecoveryResult(
        coefficients=coefficients,
        support=support,
        residual_norm=residual_norm,
        iterations=len(support),
        residual_history=history,
    )
