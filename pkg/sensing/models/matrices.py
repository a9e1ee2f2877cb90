"""
Matrix carriers with their invariants checked on construction.

DenseMatrix is a plain two-dimensional float64 ``numpy.ndarray``; the types
here wrap read-only arrays whose structure matters to the algorithms.
"""
from dataclasses import dataclass
from typing import Union

import numpy as np

from sensing.errors import InvalidDimensionError, InvalidParameterError

# Slack allowed on the off-diagonal bound of a target Gram
GRAM_BOUND_SLACK = 1e-12


def frozen_array(values, name: str = "matrix") -> np.ndarray:
    """Copy into a read-only, finite, two-dimensional float64 array"""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidDimensionError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidDimensionError(f"{name} contains NaN or Inf entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SparseSensingMatrix:
    """M x N sensing matrix with at most ``kappa`` non-zeros per row."""

    entries: np.ndarray
    kappa: int

    def __post_init__(self):
        object.__setattr__(self, "entries", frozen_array(self.entries, "sensing matrix"))
        cols = self.entries.shape[1]
        if not 1 <= self.kappa <= cols:
            raise InvalidParameterError(f"kappa must lie in [1, {cols}], got {self.kappa}")
        nnz = np.count_nonzero(self.entries, axis=1)
        over = np.flatnonzero(nnz > self.kappa)
        if over.size:
            row = int(over[0])
            raise InvalidParameterError(
                f"row {row} has {int(nnz[row])} non-zeros, more than kappa={self.kappa}"
            )

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class TargetGram:
    """Symmetric L x L matrix, unit diagonal, off-diagonal magnitudes <= xi."""

    entries: np.ndarray
    xi: float

    def __post_init__(self):
        object.__setattr__(self, "entries", frozen_array(self.entries, "target Gram"))
        g = self.entries
        if g.shape[0] != g.shape[1]:
            raise InvalidDimensionError(f"target Gram must be square, got shape {g.shape}")
        if not 0.0 <= self.xi < 1.0:
            raise InvalidParameterError(f"xi must lie in [0, 1), got {self.xi}")
        if not np.array_equal(g, g.T):
            raise InvalidParameterError("target Gram is not symmetric")
        if not (np.diag(g) == 1.0).all():
            raise InvalidParameterError("target Gram must have a unit diagonal")
        off = np.abs(g - np.diag(np.diag(g)))
        if off.max(initial=0.0) > self.xi + GRAM_BOUND_SLACK:
            raise InvalidParameterError(
                f"off-diagonal magnitude {off.max():.6g} exceeds xi={self.xi:.6g}"
            )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class CoherenceReport:
    """Mutual coherence of a column set next to its Welch lower bound"""

    mu: float
    welch: float
    column_count: int
    row_count: int


@dataclass(frozen=True, eq=False)
class ObjectiveContext:
    """Effective dictionary Psi = A @ Psi_bar (N x L) and the trade-off weight."""

    psi: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "psi", frozen_array(self.psi, "psi"))
        if not np.isfinite(self.lam) or self.lam < 0:
            raise InvalidParameterError(f"lambda must be a non-negative real, got {self.lam}")


MatrixLike = Union[np.ndarray, SparseSensingMatrix, TargetGram]


def entries_of(x: MatrixLike) -> np.ndarray:
    """Underlying array of a matrix carrier, or the array itself"""
    if isinstance(x, (SparseSensingMatrix, TargetGram)):
        return x.entries
    return np.asarray(x, dtype=np.float64)
