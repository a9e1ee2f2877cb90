"""
Command-line front end.

Usage:
    python manage.py design    --config run.toml --out phi.csv [--trace trace.csv]
    python manage.py diagnose  --trace trace.csv [--gamma 0.9]
    python manage.py benchmark --config run.toml --out report.csv
    python manage.py sweep     --config run.toml --out report.csv

Any config field can be overridden with ``--<field> <value>`` (``--lambda``
for lam); environment variables ``SSD_<FIELD>`` sit between the file and the
command line. Exit codes: 0 success, 2 configuration or input error,
3 numeric divergence, 4 diagnostic failure.
"""
import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from logger import setup_logger
from sensing import __version__
from sensing.bench import optimal_lambda_by_snr, sweep
from sensing.config import load_config, settings
from sensing.core import make_dct_base, make_dictionary, make_identity_base
from sensing.designer import DECREASE_RTOL, design
from sensing.errors import (
    ConfigError,
    MatrixFormatError,
    NumericDivergenceError,
    SensingError,
    StepSearchError,
    TraceFormatError,
)
from sensing.models.configs import BenchmarkConfig, DesignConfig
from sensing.models.results import ExperimentReport, RunManifest
from sensing.utils.matrix_io import atomic_write, format_float, read_matrix, read_trace, write_matrix, write_report, write_trace

logger = setup_logger("manage")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_DIAGNOSTIC = 4

# Absolute slack on the monotonicity and sufficient-decrease checks
DIAGNOSE_SLACK = 1e-10


def _now() -> datetime:
    return datetime.now(timezone.utc)


def _manifest_path(path: Path) -> Path:
    return path.with_name(path.name + ".manifest.json")


def _write_manifest(path: Path, manifest: RunManifest, status: int) -> None:
    manifest.finished_at = _now()
    manifest.exit_status = status
    atomic_write(path, manifest.model_dump_json(indent=2) + "\n")
    logger.info(f"Manifest written to {path}")


def _new_manifest(subcommand: str, inputs: Dict[str, Optional[str]], outputs: Dict[str, Optional[str]]) -> RunManifest:
    return RunManifest(
        subcommand=subcommand, config={}, defaults_applied=[],
        inputs=inputs, outputs=outputs, tool_version=__version__, started_at=_now(),
    )


def _load_base(spec: str, n: int):
    if spec == "identity":
        return make_identity_base(n)
    if spec == "dct":
        return make_dct_base(n)
    return read_matrix(spec)


def _fail(manifest: RunManifest, status: int, message: str) -> int:
    manifest.messages.append(message)
    logger.error(message)
    return status


def cmd_design(
    config_path: Optional[str],
    out_phi_path: str,
    out_trace_path: Optional[str] = None,
    overrides: Optional[Mapping[str, str]] = None,
) -> int:
    """Run one design and write Phi, its trace and a manifest"""
    out_phi = Path(out_phi_path)
    out_trace = Path(out_trace_path) if out_trace_path else out_phi.with_name(out_phi.stem + ".trace.csv")
    manifest = _new_manifest(
        "design",
        inputs={"config": config_path},
        outputs={"phi": str(out_phi), "trace": str(out_trace)},
    )
    status = EXIT_CONFIG
    try:
        config = load_config(DesignConfig, Path(config_path) if config_path else None, overrides=overrides)
        manifest.config = config.model_dump(mode="json")
        manifest.defaults_applied = config.defaults_applied()
        manifest.inputs.update({"dictionary": config.dictionary, "base": config.base})

        if config.dictionary:
            psi_bar = read_matrix(config.dictionary)
        else:
            psi_bar = make_dictionary(config.n, config.l, config.seed)
        base = _load_base(config.base, config.n)

        result = design(psi_bar, base, config)
        write_matrix(out_phi, result.phi)
        write_trace(out_trace, result.trace)
        manifest.messages.append(
            f"termination={result.termination_reason} iterations={len(result.trace)} "
            f"f={format_float(result.objective)} stationarity={format_float(result.stationarity)}"
        )
        status = EXIT_OK
        logger.info(f"Design written to {out_phi} ({result.termination_reason})")
    except ConfigError as e:
        for message in e.messages:
            manifest.messages.append(message)
            logger.error(f"Invalid configuration: {message}")
        status = EXIT_CONFIG
    except (NumericDivergenceError, StepSearchError) as e:
        status = _fail(manifest, EXIT_DIVERGENCE, f"Design diverged: {e}")
    except SensingError as e:
        status = _fail(manifest, EXIT_CONFIG, f"Invalid input: {e}")
    finally:
        _write_manifest(_manifest_path(out_phi), manifest, status)
    return status


def cmd_diagnose(trace_path: str, gamma: float = 0.9) -> int:
    """
    Check a design trace: monotone objective and the sufficient-decrease
    inequality f_k-1 - f_k >= gamma / (2 eta_k) * d_phi_k^2 on every row.
    """
    path = Path(trace_path)
    manifest = _new_manifest("diagnose", inputs={"trace": str(path)}, outputs={})
    manifest.config = {"gamma": gamma}
    status = EXIT_CONFIG
    try:
        if not 0 < gamma < 1:
            raise ConfigError([f"gamma: must lie in (0, 1), got {gamma}"])
        trace = read_trace(path)
        if not trace:
            logger.warning(f"Trace {path} is empty; nothing to check")
            manifest.messages.append("empty trace")
            status = EXIT_OK
            return status

        for prev, rec in zip(trace, trace[1:]):
            if rec.f > prev.f + DIAGNOSE_SLACK:
                status = _fail(
                    manifest, EXIT_DIAGNOSTIC,
                    f"objective increased at iteration {rec.iteration}: {prev.f!r} -> {rec.f!r}",
                )
                return status
            required = gamma / (2.0 * rec.eta) * rec.d_phi ** 2
            slack = DIAGNOSE_SLACK + DECREASE_RTOL * max(1.0, abs(prev.f))
            if prev.f - rec.f < required - slack:
                status = _fail(
                    manifest, EXIT_DIAGNOSTIC,
                    f"sufficient decrease violated at iteration {rec.iteration}: "
                    f"decrease {prev.f - rec.f:.6g} < {required:.6g}",
                )
                return status

        # last step length is the stationarity surrogate at the previous iterate
        surrogate = trace[-1].d_phi
        manifest.messages.append(f"checked {len(trace)} rows; stationarity surrogate {format_float(surrogate)}")
        logger.info(f"Trace OK: {len(trace)} rows, final stationarity surrogate {surrogate:.3e}")
        status = EXIT_OK
    except ConfigError as e:
        for message in e.messages:
            manifest.messages.append(message)
            logger.error(message)
        status = EXIT_CONFIG
    except TraceFormatError as e:
        status = _fail(manifest, EXIT_CONFIG, f"Malformed trace: {e}")
    finally:
        _write_manifest(path.with_name(path.name + ".diagnose.manifest.json"), manifest, status)
    return status


def _load_external(config: BenchmarkConfig):
    return {name: read_matrix(path) for name, path in config.external.items()}


def _run_report(subcommand: str, config_path: Optional[str], out_report_path: str,
                overrides: Optional[Mapping[str, str]], threads: int) -> int:
    out = Path(out_report_path)
    manifest = _new_manifest(subcommand, inputs={"config": config_path}, outputs={"report": str(out)})
    status = EXIT_CONFIG
    try:
        config = load_config(BenchmarkConfig, Path(config_path) if config_path else None, overrides=overrides)
        manifest.config = config.model_dump(mode="json")
        manifest.config["threads"] = threads
        manifest.defaults_applied = config.defaults_applied()
        manifest.messages.append("support sampler: uniform without replacement")
        manifest.inputs.update(config.external)
        external = _load_external(config)

        if subcommand == "benchmark":
            report = sweep(config, "snr", [config.snr_db], external=external, threads=threads)
        elif config.axis == "lambda" and config.snr_grid:
            best, reports = optimal_lambda_by_snr(config, config.snr_grid, config.values, threads=threads)
            report = ExperimentReport(config=manifest.config)
            for snr, snr_report in zip(config.snr_grid, reports):
                for cell in snr_report.cells:
                    report.cells.append(cell.model_copy(update={"axis": f"lambda@snr={snr:g}"}))
            argmin = out.with_name(out.stem + ".argmin.csv")
            atomic_write(argmin, "snr_db,lambda\n" + "".join(
                f"{format_float(snr)},{format_float(lam)}\n" for snr, lam in best.items()
            ))
            manifest.outputs["argmin"] = str(argmin)
        else:
            report = sweep(config, config.axis, config.values, external=external, threads=threads)

        write_report(out, report)
        status = EXIT_OK
        logger.info(f"Report with {len(report.cells)} rows written to {out}")
    except ConfigError as e:
        for message in e.messages:
            manifest.messages.append(message)
            logger.error(f"Invalid configuration: {message}")
        status = EXIT_CONFIG
    except (NumericDivergenceError, StepSearchError) as e:
        status = _fail(manifest, EXIT_DIVERGENCE, f"Design diverged: {e}")
    except (MatrixFormatError, SensingError) as e:
        status = _fail(manifest, EXIT_CONFIG, f"Invalid input: {e}")
    finally:
        _write_manifest(_manifest_path(out), manifest, status)
    return status


def cmd_benchmark(config_path: Optional[str], out_report_path: str,
                  overrides: Optional[Mapping[str, str]] = None, threads: int = 1) -> int:
    """Benchmark the configured systems at the configured SNR"""
    return _run_report("benchmark", config_path, out_report_path, overrides, threads)


def cmd_sweep(config_path: Optional[str], out_report_path: str,
              overrides: Optional[Mapping[str, str]] = None, threads: int = 1) -> int:
    """Sweep the configured axis; a lambda sweep with snr_grid also writes per-SNR argmins"""
    return _run_report("sweep", config_path, out_report_path, overrides, threads)


def parse_overrides(extra: Sequence[str]) -> Dict[str, str]:
    """Turn ``--key value`` / ``--key=value`` pairs into a mapping"""
    overrides = {}
    i = 0
    while i < len(extra):
        token = extra[i]
        if not token.startswith("--") or token == "--":
            raise ConfigError([f"{token}: expected --key value"])
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError([f"{key}: missing value"])
            value = extra[i + 1]
            i += 2
        overrides[key] = value
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manage.py", description=settings.app_title, allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    design_p = sub.add_parser("design", help="design a row-sparse sensing matrix", allow_abbrev=False)
    design_p.add_argument("--config", help="TOML run configuration ([design] section)")
    design_p.add_argument("--out", required=True, help="Phi output (.csv, or .ssmx/.bin binary)")
    design_p.add_argument("--trace", help="trace CSV output (default: <out>.trace.csv)")
    design_p.add_argument("--seed", type=int)
    design_p.add_argument("--threads", type=int, default=settings.threads)

    diag_p = sub.add_parser("diagnose", help="verify a design trace", allow_abbrev=False)
    diag_p.add_argument("--trace", required=True)
    diag_p.add_argument("--gamma", type=float, default=0.9)

    for name in ("benchmark", "sweep"):
        p = sub.add_parser(name, help=f"{name} CS systems ([benchmark] section)", allow_abbrev=False)
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--out", required=True, help="report CSV output")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int, default=settings.threads)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)

    try:
        overrides = parse_overrides(extra) if args.command != "diagnose" else {}
        if args.command == "diagnose" and extra:
            raise ConfigError([f"unexpected arguments: {' '.join(extra)}"])
    except ConfigError as e:
        for message in e.messages:
            logger.error(message)
        return EXIT_CONFIG

    if args.command == "diagnose":
        return cmd_diagnose(args.trace, gamma=args.gamma)
    if args.threads < 1:
        logger.error("threads: must be at least 1")
        return EXIT_CONFIG

    if args.command == "design":
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        return cmd_design(args.config, args.out, args.trace, overrides)

    if args.seed is not None:
        overrides["seeds"] = str(args.seed)
    if args.command == "benchmark":
        return cmd_benchmark(args.config, args.out, overrides, threads=args.threads)
    return cmd_sweep(args.config, args.out, overrides, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
