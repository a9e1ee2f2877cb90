"""
Design objective

    f(Phi, G) = ||G - Psi^T Phi^T Phi Psi||_F^2 + lam * ||Phi||_F^2

its gradients, and the extended objective rho = f + indicator of the
feasible sets.
"""
import enum
from typing import Union

import numpy as np

from sensing.core import as_dense, gram_of
from sensing.errors import InvalidDimensionError
from sensing.models.matrices import GRAM_BOUND_SLACK, MatrixLike, ObjectiveContext
from sensing.projections import keep_largest


class Feasibility(enum.Enum):
    """Tagged value returned by rho_value outside the feasible sets"""

    INFEASIBLE = "infeasible"

    def __repr__(self):
        return "INFEASIBLE"


INFEASIBLE = Feasibility.INFEASIBLE


def check_operands(phi: MatrixLike, g: MatrixLike, ctx: ObjectiveContext):
    phi = as_dense(phi, "phi")
    g = as_dense(g, "g")
    n, l = ctx.psi.shape
    if phi.shape[1] != n:
        raise InvalidDimensionError(f"phi has {phi.shape[1]} columns but psi has {n} rows")
    if g.shape != (l, l):
        raise InvalidDimensionError(f"g must be {l}x{l}, got {g.shape}")
    return phi, g


# Unvalidated kernels used inside the design loop

def f_value(phi: np.ndarray, g: np.ndarray, psi: np.ndarray, lam: float) -> float:
    residual = g - gram_of(phi @ psi)
    return float(np.sum(residual * residual) + lam * np.sum(phi * phi))


def f_gradient(phi: np.ndarray, g: np.ndarray, psi: np.ndarray, lam: float) -> np.ndarray:
    # 2 lam Phi - 4 Phi Psi G Psi^T + 4 Phi Psi Psi^T Phi^T Phi Psi Psi^T
    b = phi @ psi
    return 2.0 * lam * phi + 4.0 * (b @ (b.T @ b - g)) @ psi.T


def objective_value(phi: MatrixLike, g: MatrixLike, ctx: ObjectiveContext) -> float:
    """
    f(Phi, G) = ||G - Psi^T Phi^T Phi Psi||_F^2 + lam ||Phi||_F^2.

    Raises:
        InvalidDimensionError: inconsistent shapes
    """
    phi, g = check_operands(phi, g, ctx)
    return f_value(phi, g, ctx.psi, ctx.lam)


def gradient_phi(phi: MatrixLike, g: MatrixLike, ctx: ObjectiveContext) -> np.ndarray:
    """
    Gradient of f in Phi: 2 lam Phi - 4 Phi Psi G Psi^T + 4 Phi Psi Psi^T Phi^T Phi Psi Psi^T.

    G is assumed symmetric, as every target Gram is.
    """
    phi, g = check_operands(phi, g, ctx)
    return f_gradient(phi, g, ctx.psi, ctx.lam)


def gradient_g(phi: MatrixLike, g: MatrixLike, ctx: ObjectiveContext) -> np.ndarray:
    """Gradient of f in G: 2 (G - Psi^T Phi^T Phi Psi)"""
    phi, g = check_operands(phi, g, ctx)
    return 2.0 * (g - gram_of(phi @ ctx.psi))


def is_row_sparse(phi: np.ndarray, kappa: int) -> bool:
    return bool((np.count_nonzero(phi, axis=1) <= kappa).all())


def is_relaxed_gram(g: np.ndarray, xi: float) -> bool:
    if g.shape[0] != g.shape[1] or not np.array_equal(g, g.T):
        return False
    if not (np.diag(g) == 1.0).all():
        return False
    off = np.abs(g - np.diag(np.diag(g)))
    return bool(off.max(initial=0.0) <= xi + GRAM_BOUND_SLACK)


def rho_value(
    phi: MatrixLike, g: MatrixLike, ctx: ObjectiveContext, kappa: int, xi: float
) -> Union[float, Feasibility]:
    """
    f(Phi, G) when Phi is row-kappa-sparse and G lies in the relaxed Gram set,
    otherwise the INFEASIBLE sentinel. Infeasibility is a value, not an error.
    """
    phi, g = check_operands(phi, g, ctx)
    if not is_row_sparse(phi, kappa) or not is_relaxed_gram(g, xi):
        return INFEASIBLE
    return f_value(phi, g, ctx.psi, ctx.lam)


def stationarity(phi: MatrixLike, g: MatrixLike, ctx: ObjectiveContext, kappa: int, eta: float) -> float:
    """||Phi - P_kappa(Phi - eta * grad_Phi f(Phi, G))||_F"""
    phi, g = check_operands(phi, g, ctx)
    step = keep_largest(phi - eta * f_gradient(phi, g, ctx.psi, ctx.lam), kappa)
    return float(np.linalg.norm(phi - step))
