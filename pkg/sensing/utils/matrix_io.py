"""
File formats.

Matrices: CSV (one row per line, 17 significant digits) or the SSMX binary
layout ``b"SSMX" | u32 rows | u32 cols | rows*cols little-endian f64``.
Traces and reports: CSV with fixed column orders. Every write goes to a
temporary file in the target directory and is renamed into place.
"""
import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np

from sensing.errors import MatrixFormatError, TraceFormatError
from sensing.models.matrices import MatrixLike, entries_of
from sensing.models.results import ExperimentReport, TraceRecord

SSMX_MAGIC = b"SSMX"
SSMX_HEADER = np.dtype([("magic", "S4"), ("rows", "<u4"), ("cols", "<u4")])
BINARY_SUFFIXES = (".ssmx", ".bin")

TRACE_COLUMNS = ["iter", "f", "d_phi", "d_g", "eta", "halvings"]
REPORT_COLUMNS = ["system", "axis", "axis_value", "mse", "psnr_db", "failures", "seed"]

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """Shortest round-trip decimal; inf / nan spelled out"""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def atomic_write(path: PathLike, data: Union[str, bytes]) -> None:
    """Write to a temporary sibling file, then rename over ``path``"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _is_binary(path: PathLike) -> bool:
    return Path(path).suffix.lower() in BINARY_SUFFIXES


def encode_ssmx(matrix: MatrixLike) -> bytes:
    arr = np.asarray(entries_of(matrix), dtype=np.float64)
    if arr.ndim != 2:
        raise MatrixFormatError(f"expected a 2-D matrix, got shape {arr.shape}")
    header = np.array([(SSMX_MAGIC, arr.shape[0], arr.shape[1])], dtype=SSMX_HEADER)
    return header.tobytes() + arr.astype("<f8").tobytes(order="C")


def decode_ssmx(payload: bytes) -> np.ndarray:
    if len(payload) < SSMX_HEADER.itemsize:
        raise MatrixFormatError("file too short for an SSMX header")
    header = np.frombuffer(payload, dtype=SSMX_HEADER, count=1)[0]
    if header["magic"] != SSMX_MAGIC:
        raise MatrixFormatError(f"bad magic {header['magic']!r}, expected {SSMX_MAGIC!r}")
    rows, cols = int(header["rows"]), int(header["cols"])
    body = payload[SSMX_HEADER.itemsize:]
    if len(body) != rows * cols * 8:
        raise MatrixFormatError(f"expected {rows * cols} entries, found {len(body) / 8:g}")
    return np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(rows, cols)


def encode_csv(matrix: MatrixLike) -> str:
    arr = np.asarray(entries_of(matrix), dtype=np.float64)
    if arr.ndim != 2:
        raise MatrixFormatError(f"expected a 2-D matrix, got shape {arr.shape}")
    return "".join(",".join(format_float(v) for v in row) + "\n" for row in arr)


def decode_csv(text: str) -> np.ndarray:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise MatrixFormatError("empty matrix file")
    try:
        arr = np.array([[float(v) for v in line.split(",")] for line in rows])
    except ValueError as e:
        raise MatrixFormatError(f"malformed matrix CSV: {e}")
    if arr.ndim != 2:
        raise MatrixFormatError("matrix CSV rows have different lengths")
    return arr


def write_matrix(path: PathLike, matrix: MatrixLike) -> None:
    """CSV, or SSMX for ``.ssmx`` / ``.bin`` paths"""
    if _is_binary(path):
        atomic_write(path, encode_ssmx(matrix))
    else:
        atomic_write(path, encode_csv(matrix))


def read_matrix(path: PathLike) -> np.ndarray:
    """Inverse of write_matrix; the format follows the suffix"""
    try:
        if _is_binary(path):
            return decode_ssmx(Path(path).read_bytes())
        return decode_csv(Path(path).read_text())
    except FileNotFoundError:
        raise MatrixFormatError(f"matrix file not found: {path}")


def write_trace(path: PathLike, trace: Iterable[TraceRecord]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for rec in trace:
        writer.writerow([
            rec.iteration, format_float(rec.f), format_float(rec.d_phi),
            format_float(rec.d_g), format_float(rec.eta), rec.halvings,
        ])
    atomic_write(path, buffer.getvalue())


def read_trace(path: PathLike) -> List[TraceRecord]:
    """
    Parse a trace CSV.

    Raises:
        TraceFormatError: missing file, wrong header, or unparsable row
    """
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise TraceFormatError(f"trace file not found: {path}")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != TRACE_COLUMNS:
        raise TraceFormatError(f"expected header {','.join(TRACE_COLUMNS)}, got {header}", line=1)

    records = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(TRACE_COLUMNS):
            raise TraceFormatError(f"expected {len(TRACE_COLUMNS)} fields, got {len(row)}", line=line)
        try:
            records.append(TraceRecord(
                iteration=int(row[0]), f=float(row[1]), d_phi=float(row[2]),
                d_g=float(row[3]), eta=float(row[4]), halvings=int(row[5]),
            ))
        except ValueError as e:
            raise TraceFormatError(str(e), line=line)
    return records


def write_report(path: PathLike, report: ExperimentReport) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for cell in report.cells:
        writer.writerow([
            cell.system, cell.axis, format_float(cell.axis_value), format_float(cell.mse),
            format_float(cell.psnr_db), cell.failures, cell.seed,
        ])
    atomic_write(path, buffer.getvalue())
