"""
Synthetic benchmarks of CS systems: signal ensembles, baseline sensing
matrices, MSE / PSNR, and sweeps over SNR, M, K, kappa and lambda.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from logger import setup_logger
from sensing.config import format_validation_errors
from sensing.core import as_dense, make_dct_base, make_dictionary, make_identity_base, mutual_coherence
from sensing.designer import design
from sensing.errors import ConfigError, InvalidDimensionError, InvalidParameterError, SensingError
from sensing.models.configs import SWEEP_AXES, BenchmarkConfig
from sensing.models.matrices import MatrixLike, SparseSensingMatrix
from sensing.models.results import ExperimentCell, ExperimentReport, SignalEnsemble
from sensing.recovery import omp
from sensing.utils.rng import stream

logger = setup_logger(__name__)

# Support positions are drawn uniformly without replacement
SUPPORT_SAMPLER = "uniform"


def _positive(value: int, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise InvalidDimensionError(f"{name} must be a positive integer, got {value}")
    return int(value)


def gen_sparse_signals(psi: MatrixLike, k: int, j: int, snr_db: float, seed: int) -> SignalEnsemble:
    """
    J signals x_i = Psi s_i + e_i with exactly k non-zeros per code.

    Supports are uniform without replacement, non-zero values standard
    normal. One noise level serves the whole ensemble:
    10 log10(mean clean energy per entry / sigma^2) = snr_db, and
    snr_db = inf gives noiseless signals.

    Raises:
        InvalidParameterError: k outside [1, L] or j < 1
    """
    psi = as_dense(psi, "psi")
    n, l = psi.shape
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= l:
        raise InvalidParameterError(f"k must lie in [1, {l}], got {k}")
    if isinstance(j, bool) or int(j) != j or j < 1:
        raise InvalidParameterError(f"j must be a positive integer, got {j}")
    k, j = int(k), int(j)

    rng = stream(seed, "signals")
    supports = np.argsort(rng.random((j, l)), axis=1)[:, :k]
    codes = np.zeros((l, j))
    np.put_along_axis(codes.T, supports, rng.standard_normal((j, k)), axis=1)

    clean = psi @ codes
    if math.isinf(snr_db) and snr_db > 0:
        sigma = 0.0
        signals = clean
    else:
        power = float(np.mean(clean ** 2))
        sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
        signals = clean + sigma * stream(seed, "noise").standard_normal(clean.shape)

    return SignalEnsemble(signals=signals, codes=codes, sigma=sigma, snr_db=snr_db, seed=seed, k=k)


def make_random_gaussian(m: int, n: int, seed: int) -> np.ndarray:
    """M x N matrix of i.i.d. standard-normal entries"""
    m, n = _positive(m, "m"), _positive(n, "n")
    return stream(seed, "randn").standard_normal((m, n))


def make_binary_sparse(m: int, n: int, kappa: int, seed: int) -> SparseSensingMatrix:
    """
    M x N {0, 1} matrix with exactly kappa ones per row at uniformly random
    distinct positions.

    Raises:
        InvalidParameterError: kappa outside [1, n]
    """
    m, n = _positive(m, "m"), _positive(n, "n")
    if isinstance(kappa, bool) or int(kappa) != kappa or not 1 <= kappa <= n:
        raise InvalidParameterError(f"kappa must lie in [1, {n}], got {kappa}")
    positions = np.argsort(stream(seed, "bispar").random((m, n)), axis=1)[:, :int(kappa)]
    phi = np.zeros((m, n))
    np.put_along_axis(phi, positions, 1.0, axis=1)
    return SparseSensingMatrix(phi, int(kappa))


def mse(x: MatrixLike, x_hat: MatrixLike) -> float:
    """(1 / (N J)) * sum_i ||x_i - x_hat_i||^2"""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape or x.ndim != 2:
        raise InvalidDimensionError(f"shape mismatch: {x.shape} vs {x_hat.shape}")
    diff = x - x_hat
    return float(np.sum(diff * diff) / x.size)


def psnr(mse_value: float, r: int = 8) -> float:
    """10 log10((2^r - 1)^2 / MSE) in dB; infinite for a perfect reconstruction"""
    if mse_value <= 0:
        return math.inf
    return 10.0 * math.log10((2 ** r - 1) ** 2 / mse_value)


def _recover_column(y: np.ndarray, equivalent: np.ndarray, k: int) -> Tuple[Optional[np.ndarray], Optional[str]]:
    try:
        return omp(y, equivalent, k).coefficients, None
    except (SensingError, np.linalg.LinAlgError) as e:
        return None, str(e)


def run_benchmark(
    systems: Mapping[str, MatrixLike],
    psi: MatrixLike,
    ensemble: SignalEnsemble,
    k: int,
    *,
    axis: str = "none",
    axis_value: float = 0.0,
    seed: Optional[int] = None,
    r: int = 8,
    threads: int = 1,
) -> ExperimentReport:
    """
    Sense, recover and reconstruct the ensemble with every system.

    For each Phi: Y = Phi X, s_hat_i = omp(Y_i, Phi Psi, k), x_hat_i = Psi s_hat_i.
    A failed recovery counts as the zero reconstruction and as a failure; it
    never aborts the run. Recoveries run on ``threads`` workers; results are
    identical for any thread count.
    """
    psi = as_dense(psi, "psi")
    seed = ensemble.seed if seed is None else seed
    signals = ensemble.signals
    if signals.shape[0] != psi.shape[0]:
        raise InvalidDimensionError(
            f"signals have {signals.shape[0]} rows but psi has {psi.shape[0]}"
        )

    report = ExperimentReport(seeds=[seed], support_sampler=SUPPORT_SAMPLER)
    for name, system in systems.items():
        phi = as_dense(system, name)
        if phi.shape[1] != psi.shape[0]:
            raise InvalidDimensionError(f"system {name} has {phi.shape[1]} columns, expected {psi.shape[0]}")
        equivalent = phi @ psi
        measurements = phi @ signals
        try:
            mu = mutual_coherence(equivalent).mu
        except InvalidDimensionError:
            mu = math.nan

        columns = [measurements[:, i] for i in range(measurements.shape[1])]
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            outcomes = list(pool.map(lambda y: _recover_column(y, equivalent, k), columns))

        codes = np.zeros((psi.shape[1], len(columns)))
        failures = 0
        for i, (coefficients, error) in enumerate(outcomes):
            if coefficients is None:
                failures += 1
                logger.warning(f"Recovery of signal {i} failed for {name}: {error}")
            else:
                codes[:, i] = coefficients

        cell_mse = mse(signals, psi @ codes)
        cell = ExperimentCell(
            system=name, axis=axis, axis_value=axis_value, mse=cell_mse,
            psnr_db=psnr(cell_mse, r), failures=failures, seed=seed,
        )
        logger.info(
            f"{name} [{axis}={axis_value:g}, seed={seed}]: mu={mu:.4f} mse={cell.mse:.6g} "
            f"psnr={cell.psnr_db:.3f} dB failures={failures} (supports {SUPPORT_SAMPLER})"
        )
        report.cells.append(cell)
    return report


def build_systems(
    names: Sequence[str],
    psi_bar: MatrixLike,
    config: BenchmarkConfig,
    seed: int,
    *,
    m: Optional[int] = None,
    kappa: Optional[int] = None,
    lam: Optional[float] = None,
) -> Dict[str, np.ndarray]:
    """
    Physical sensing matrices of the named CS systems.

    randn: dense Gaussian. bispar: binary, kappa ones per row.
    sparse: designed with xi = 0 and identity base. sparse-etf: xi at the
    Welch bound, identity base. sparse-a: xi = 0 under the DCT base; the
    returned matrix is Phi A.
    """
    psi_bar = as_dense(psi_bar, "psi_bar")
    m = config.m if m is None else m
    kappa = config.kappa if kappa is None else kappa
    lam = config.lam if lam is None else lam
    n = psi_bar.shape[0]

    systems = {}
    for name in names:
        if name == "randn":
            systems[name] = make_random_gaussian(m, n, seed)
        elif name == "bispar":
            systems[name] = make_binary_sparse(m, n, kappa, seed).entries
        elif name in ("sparse", "sparse-etf", "sparse-a"):
            xi = "welch" if name == "sparse-etf" else 0.0
            base = make_dct_base(n) if name == "sparse-a" else make_identity_base(n)
            design_config = config.design_config(m=m, kappa=kappa, lam=lam, xi=xi, seed=seed)
            result = design(psi_bar, base, design_config)
            systems[name] = result.phi.entries @ base
        else:
            raise InvalidParameterError(f"unknown system {name!r}")
    return systems


def _apply_axis(config: BenchmarkConfig, axis: str, value: float) -> BenchmarkConfig:
    field = {"snr": "snr_db", "m": "m", "k": "k", "kappa": "kappa", "lambda": "lam"}[axis]
    if field in ("m", "k", "kappa"):
        if float(value) != int(value):
            raise InvalidParameterError(f"{axis} values must be integers, got {value}")
        value = int(value)
    updated = config.model_dump()
    updated[field] = value
    try:
        return BenchmarkConfig.model_validate(updated)
    except ValidationError as e:
        raise ConfigError([f"{axis}={value:g}: {message}" for message in format_validation_errors(e)]) from e


def sweep(
    config: BenchmarkConfig,
    axis: str,
    values: Sequence[float],
    *,
    external: Optional[Mapping[str, MatrixLike]] = None,
    threads: int = 1,
) -> ExperimentReport:
    """
    Re-design and re-benchmark every system at each value along ``axis``,
    once per seed in config.seeds. One cell per (system, value, seed).

    Designs are reused across values that do not change them (SNR and K).

    Raises:
        InvalidParameterError: unknown axis, no values, non-integer m, k or kappa
        ConfigError: a value makes the configuration invalid, e.g. kappa > n
    """
    if axis not in SWEEP_AXES:
        raise InvalidParameterError(f"unknown sweep axis {axis!r}; choose from {list(SWEEP_AXES)}")
    if not values:
        raise InvalidParameterError("sweep needs at least one value")

    cell_configs = [_apply_axis(config, axis, value) for value in values]
    report = ExperimentReport(config=config.model_dump(mode="json"), support_sampler=SUPPORT_SAMPLER)
    for seed in config.seeds:
        psi_bar = make_dictionary(config.n, config.l, seed)
        designs: Dict[Tuple[int, int, float], Dict[str, np.ndarray]] = {}
        for value, cell_config in zip(values, cell_configs):
            key = (cell_config.m, cell_config.kappa, cell_config.lam)
            if key not in designs:
                designs[key] = build_systems(
                    config.systems, psi_bar, cell_config, seed,
                    m=cell_config.m, kappa=cell_config.kappa, lam=cell_config.lam,
                )
            systems = dict(designs[key])
            for name, matrix in (external or {}).items():
                systems[name] = matrix

            ensemble = gen_sparse_signals(psi_bar, cell_config.k, cell_config.j, cell_config.snr_db, seed)
            report.extend(run_benchmark(
                systems, psi_bar, ensemble, cell_config.k,
                axis=axis, axis_value=float(value), seed=seed,
                r=config.psnr_bits, threads=threads,
            ))
    return report


def lambda_argmin(report: ExperimentReport, system: str = "sparse") -> float:
    """Lambda with the smallest median MSE (over seeds) for one system"""
    lambdas = [cell.axis_value for cell in report.cells if cell.system == system and cell.axis == "lambda"]
    if not lambdas:
        raise InvalidParameterError(f"report has no lambda cells for system {system!r}")
    candidates = list(dict.fromkeys(lambdas))
    # first (smallest-index) lambda wins ties
    return min(candidates, key=lambda lam: report.median_mse(system, lam))


def optimal_lambda_by_snr(
    config: BenchmarkConfig,
    snr_values: Sequence[float],
    lambda_values: Sequence[float],
    *,
    system: str = "sparse",
    threads: int = 1,
) -> Tuple[Dict[float, float], List[ExperimentReport]]:
    """
    For each SNR, sweep lambda and pick the value with the lowest median MSE.

    Returns:
        ({snr_db: best lambda}, one lambda-sweep report per SNR)
    """
    if system not in config.systems:
        config = config.model_copy(update={"systems": [system]})
    best = {}
    reports = []
    for snr in snr_values:
        snr_config = _apply_axis(config, "snr", snr)
        report = sweep(snr_config, "lambda", lambda_values, threads=threads)
        best[float(snr)] = lambda_argmin(report, system)
        logger.info(f"SNR {snr:g} dB: optimal lambda {best[float(snr)]:g}")
        reports.append(report)
    return best, reports
