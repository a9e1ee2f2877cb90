"""
Alternating minimisation for row-sparse sensing matrices.

Each iteration takes one projected gradient step on Phi (step size from
backtracking or a constant) and then re-solves the Gram subproblem exactly:

    Phi_k = P_kappa(Phi_k-1 - eta * grad_Phi f(Phi_k-1, G_k-1))
    G_k   = P_xi(Psi^T Phi_k^T Phi_k Psi)

With xi = 0 the Gram set is {I} and the loop is plain iterative hard
thresholding on ||I - Psi^T Phi^T Phi Psi||_F^2 + lam ||Phi||_F^2.
"""
import math
from typing import Tuple

import numpy as np

from logger import setup_logger
from sensing.core import as_dense, gram_of, welch_bound
from sensing.errors import (
    InvalidDimensionError,
    InvalidParameterError,
    NumericDivergenceError,
    StepSearchError,
)
from sensing.models.configs import DesignConfig
from sensing.models.matrices import MatrixLike, ObjectiveContext, SparseSensingMatrix, TargetGram
from sensing.models.results import DesignResult, TraceRecord
from sensing.objective import INFEASIBLE, check_operands, f_gradient, f_value, rho_value
from sensing.projections import clip_gram, keep_largest
from sensing.utils.rng import stream

logger = setup_logger(__name__)

# Step reductions tried before giving up; further halving underflows in float64
MAX_HALVINGS = 60

# Round-off allowance on the sufficient-decrease test, relative to |f|
DECREASE_RTOL = 64 * np.finfo(np.float64).eps


def _check_step_rule(eta0: float, gamma: float, alpha: float) -> None:
    if not eta0 > 0:
        raise InvalidParameterError(f"eta0 must be positive, got {eta0}")
    if not 0 < gamma < 1:
        raise InvalidParameterError(f"gamma must lie in (0, 1), got {gamma}")
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")


def _backtrack(
    phi: np.ndarray,
    g: np.ndarray,
    psi: np.ndarray,
    lam: float,
    kappa: int,
    eta0: float,
    gamma: float,
    alpha: float,
    f_k: float,
) -> Tuple[float, np.ndarray, int]:
    grad = f_gradient(phi, g, psi, lam)
    slack = DECREASE_RTOL * max(1.0, abs(f_k))
    eta = eta0
    for halvings in range(MAX_HALVINGS + 1):
        candidate = keep_largest(phi - eta * grad, kappa)
        step_sq = float(np.sum((candidate - phi) ** 2))
        decrease = f_k - f_value(candidate, g, psi, lam)
        # NaN from overflow compares False and the step shrinks
        if decrease >= gamma / (2.0 * eta) * step_sq - slack:
            return eta, candidate, halvings
        eta *= alpha
    logger.error(f"Backtracking exhausted {MAX_HALVINGS} halvings from eta0={eta0}")
    raise StepSearchError(MAX_HALVINGS, eta / alpha)


def backtrack_step(
    phi_k: MatrixLike,
    g_k: MatrixLike,
    ctx: ObjectiveContext,
    kappa: int,
    eta0: float = 1.0,
    gamma: float = 0.9,
    alpha: float = 0.5,
) -> Tuple[float, SparseSensingMatrix, int]:
    """
    First eta in {eta0, alpha eta0, alpha^2 eta0, ...} whose projected step
    Phi+ = P_kappa(Phi_k - eta grad) satisfies

        rho(Phi_k, G_k) - rho(Phi+, G_k) >= gamma / (2 eta) ||Phi+ - Phi_k||_F^2

    Returns:
        (eta, Phi+, number of reductions)

    Raises:
        InvalidParameterError: eta0 <= 0, gamma or alpha outside (0, 1)
        StepSearchError: MAX_HALVINGS reductions without sufficient decrease
    """
    _check_step_rule(eta0, gamma, alpha)
    phi, g = check_operands(phi_k, g_k, ctx)
    if isinstance(kappa, bool) or int(kappa) != kappa or not 1 <= kappa <= phi.shape[1]:
        raise InvalidParameterError(f"kappa must lie in [1, {phi.shape[1]}], got {kappa}")
    xi = _gram_level(g)

    rho_k = rho_value(phi, g, ctx, kappa, xi)
    if rho_k is INFEASIBLE:
        # rho(Phi_k) is infinite, any finite candidate decreases it
        candidate = keep_largest(phi - eta0 * f_gradient(phi, g, ctx.psi, ctx.lam), kappa)
        return eta0, SparseSensingMatrix(candidate, kappa), 0

    with np.errstate(over="ignore", invalid="ignore"):
        eta, candidate, halvings = _backtrack(
            phi, g, ctx.psi, ctx.lam, kappa, eta0, gamma, alpha, rho_k
        )
    return eta, SparseSensingMatrix(candidate, kappa), halvings


def _gram_level(g: np.ndarray) -> float:
    """Smallest xi whose relaxed Gram set can contain g"""
    off = np.abs(g - np.diag(np.diag(g)))
    return float(off.max(initial=0.0))


def resolve_xi(config: DesignConfig) -> float:
    """Numeric xi of a config; "welch" becomes the Welch bound of (m, l)"""
    if config.xi != "welch":
        return float(config.xi)
    xi = welch_bound(config.m, config.l)
    if xi >= 1.0:
        raise InvalidParameterError(
            f"Welch bound of m={config.m}, l={config.l} is {xi}, outside [0, 1)"
        )
    return xi


def _check_inputs(psi_bar: MatrixLike, base: MatrixLike, config: DesignConfig) -> np.ndarray:
    psi_bar = as_dense(psi_bar, "psi_bar")
    base = as_dense(base, "base")
    if base.shape != (config.n, config.n):
        raise InvalidDimensionError(f"base must be {config.n}x{config.n}, got {base.shape}")
    if psi_bar.shape != (config.n, config.l):
        raise InvalidDimensionError(
            f"dictionary must be {config.n}x{config.l}, got {psi_bar.shape}"
        )
    return base @ psi_bar


def _alternate(psi: np.ndarray, config: DesignConfig, xi: float, identity_target: bool) -> DesignResult:
    ctx = ObjectiveContext(psi, config.lam)
    psi, lam, kappa = ctx.psi, ctx.lam, config.kappa
    backtracking = config.step_rule == "backtracking"
    if backtracking:
        _check_step_rule(config.eta0, config.gamma, config.alpha)

    logger.info(
        f"Designing {config.m}x{config.n} sensing matrix (l={config.l}, kappa={kappa}, "
        f"xi={xi:.6g}, lambda={lam}, step={config.step_rule}, seed={config.seed})"
    )

    phi = keep_largest(stream(config.seed, "design").standard_normal((config.m, config.n)), kappa)
    initial_phi = SparseSensingMatrix(phi, kappa)
    if identity_target:
        g = np.eye(config.l)
    else:
        g = clip_gram(gram_of(phi @ psi), xi)
    f = f_value(phi, g, psi, lam)
    if not math.isfinite(f):
        raise NumericDivergenceError(0, f)
    initial_objective = f

    trace = []
    reason = "max_iters"
    eta = config.eta0 if backtracking else config.eta
    quiet = 0

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, config.max_iters + 1):
            if backtracking:
                eta, phi_next, halvings = _backtrack(
                    phi, g, psi, lam, kappa, config.eta0, config.gamma, config.alpha, f
                )
            else:
                phi_next = keep_largest(phi - eta * f_gradient(phi, g, psi, lam), kappa)
                halvings = 0

            f_half = f_value(phi_next, g, psi, lam)
            g_next = g if identity_target else clip_gram(gram_of(phi_next @ psi), xi)
            f_next = f_value(phi_next, g_next, psi, lam)
            if not math.isfinite(f_next):
                logger.error(f"Objective diverged at iteration {k}")
                raise NumericDivergenceError(k, f_next)

            d_phi = float(np.linalg.norm(phi_next - phi))
            d_g = float(np.linalg.norm(g_next - g))
            trace.append(TraceRecord(k, f_next, d_phi, d_g, eta, halvings, f_half))

            rel_change = abs(f - f_next) / max(abs(f), np.finfo(np.float64).tiny)
            phi, g, f = phi_next, g_next, f_next

            if k % config.log_every == 0:
                logger.debug(f"iter {k}: f={f:.10g} d_phi={d_phi:.3e} d_g={d_g:.3e} eta={eta:.3e}")

            if d_phi < config.tol_phi:
                reason = "phi_tolerance"
                break
            quiet = quiet + 1 if rel_change < config.tol_obj else 0
            if quiet >= config.patience:
                reason = "objective_tolerance"
                break

        surrogate = float(np.linalg.norm(phi - keep_largest(phi - eta * f_gradient(phi, g, psi, lam), kappa)))

    logger.info(
        f"Design finished after {len(trace)} iterations ({reason}): f={f:.10g}, "
        f"stationarity={surrogate:.3e}"
    )
    return DesignResult(
        phi=SparseSensingMatrix(phi, kappa),
        g=TargetGram(g, xi),
        trace=trace,
        termination_reason=reason,
        xi=xi,
        initial_phi=initial_phi,
        initial_objective=initial_objective,
        stationarity=surrogate,
    )


def design(psi_bar: MatrixLike, base: MatrixLike, config: DesignConfig) -> DesignResult:
    """
    Design a row-sparse sensing matrix for the dictionary ``psi_bar`` under
    the base matrix ``base`` (Psi = base @ psi_bar is formed once).

    Phi_0 is the row-sparse projection of a seeded standard-normal matrix and
    G_0 the projected Gram of Phi_0.

    Raises:
        InvalidDimensionError: base is not n x n or psi_bar is not n x l
        NumericDivergenceError: the objective stopped being finite
        StepSearchError: backtracking could not find a step
    """
    psi = _check_inputs(psi_bar, base, config)
    return _alternate(psi, config, resolve_xi(config), identity_target=False)


def design_identity_target(psi_bar: MatrixLike, base: MatrixLike, config: DesignConfig) -> DesignResult:
    """
    Special case xi = 0: the target Gram is fixed at the identity and the Gram
    projection is skipped. Produces the same Phi iterates as ``design`` with
    xi = 0.

    Raises:
        InvalidParameterError: config.xi is not 0
    """
    if config.xi == "welch" or config.xi != 0:
        raise InvalidParameterError(f"identity target requires xi = 0, got {config.xi}")
    psi = _check_inputs(psi_bar, base, config)
    return _alternate(psi, config, 0.0, identity_target=True)
