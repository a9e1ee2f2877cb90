import math
import struct

import numpy as np
import pytest

from sensing.errors import MatrixFormatError, TraceFormatError
from sensing.models.matrices import SparseSensingMatrix
from sensing.models.results import ExperimentCell, ExperimentReport, TraceRecord
from sensing.utils.matrix_io import (
    REPORT_COLUMNS,
    TRACE_COLUMNS,
    atomic_write,
    decode_ssmx,
    encode_ssmx,
    format_float,
    read_matrix,
    read_trace,
    write_matrix,
    write_report,
    write_trace,
)


class TestMatrixFiles:
    """Test cases for CSV and binary matrix files"""

    def test_csv_exact(self, tmp_path, rng):
        """CSV keeps every bit of the entries"""
        matrix = rng.standard_normal((4, 7))
        path = tmp_path / "phi.csv"
        write_matrix(path, matrix)
        assert np.array_equal(read_matrix(path), matrix)

    def test_csv_layout(self, tmp_path):
        """One row per line, comma separated"""
        path = tmp_path / "phi.csv"
        write_matrix(path, np.array([[1.0, -0.5], [0.25, 0.0]]))
        assert path.read_text() == "1.0,-0.5\n0.25,0.0\n"

    def test_binary_exact(self, tmp_path, rng):
        """SSMX keeps every bit of the entries"""
        matrix = rng.standard_normal((3, 5))
        path = tmp_path / "phi.ssmx"
        write_matrix(path, matrix)
        assert np.array_equal(read_matrix(path), matrix)

    def test_binary_layout(self):
        """Magic, little-endian u32 rows and cols, then f64 entries"""
        payload = encode_ssmx(np.array([[1.0, 2.0]]))
        assert payload[:4] == b"SSMX"
        assert struct.unpack("<II", payload[4:12]) == (1, 2)
        assert struct.unpack("<2d", payload[12:]) == (1.0, 2.0)

    def test_sparse_carrier(self, tmp_path):
        """Carriers are written through their entries"""
        phi = SparseSensingMatrix(np.eye(3), 1)
        path = tmp_path / "phi.bin"
        write_matrix(path, phi)
        assert np.array_equal(read_matrix(path), np.eye(3))

    def test_bad_magic(self):
        """Wrong magic bytes are rejected"""
        payload = b"XXXX" + struct.pack("<II", 1, 1) + struct.pack("<d", 1.0)
        with pytest.raises(MatrixFormatError):
            decode_ssmx(payload)

    def test_truncated_body(self):
        """Body size must match the header"""
        payload = b"SSMX" + struct.pack("<II", 2, 2) + struct.pack("<d", 1.0)
        with pytest.raises(MatrixFormatError):
            decode_ssmx(payload)

    def test_short_header(self):
        """Fewer bytes than a header"""
        with pytest.raises(MatrixFormatError):
            decode_ssmx(b"SSM")

    def test_ragged_csv(self, tmp_path):
        """Rows of different lengths are rejected"""
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(MatrixFormatError):
            read_matrix(path)

    def test_non_numeric_csv(self, tmp_path):
        """Non-numeric fields are rejected"""
        path = tmp_path / "bad.csv"
        path.write_text("1,x\n")
        with pytest.raises(MatrixFormatError):
            read_matrix(path)

    def test_missing_file(self, tmp_path):
        """Missing files raise MatrixFormatError"""
        with pytest.raises(MatrixFormatError):
            read_matrix(tmp_path / "absent.csv")


class TestTraceFiles:
    """Test cases for design trace CSVs"""

    def test_header_and_values(self, tmp_path):
        """Columns iter, f, d_phi, d_g, eta, halvings"""
        path = tmp_path / "trace.csv"
        trace = [TraceRecord(1, 10.5, 0.25, 0.125, 1.0, 0), TraceRecord(2, 10.0, 0.1, 0.05, 0.5, 1)]
        write_trace(path, trace)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert lines[1] == "1,10.5,0.25,0.125,1.0,0"

        parsed = read_trace(path)
        assert [(r.iteration, r.f, r.d_phi, r.d_g, r.eta, r.halvings) for r in parsed] == [
            (1, 10.5, 0.25, 0.125, 1.0, 0), (2, 10.0, 0.1, 0.05, 0.5, 1),
        ]

    def test_empty_trace(self, tmp_path):
        """Header only reads back as an empty list"""
        path = tmp_path / "trace.csv"
        write_trace(path, [])
        assert read_trace(path) == []

    def test_wrong_header(self, tmp_path):
        """The header must match"""
        path = tmp_path / "trace.csv"
        path.write_text("iteration,f\n1,2\n")
        with pytest.raises(TraceFormatError) as exc:
            read_trace(path)
        assert exc.value.line == 1

    def test_bad_row_reports_line(self, tmp_path):
        """Unparsable rows report their line number"""
        path = tmp_path / "trace.csv"
        path.write_text(",".join(TRACE_COLUMNS) + "\n1,2.0,0.1,0.1,1.0,0\n2,abc,0.1,0.1,1.0,0\n")
        with pytest.raises(TraceFormatError) as exc:
            read_trace(path)
        assert exc.value.line == 3

    def test_short_row(self, tmp_path):
        """Rows need every column"""
        path = tmp_path / "trace.csv"
        path.write_text(",".join(TRACE_COLUMNS) + "\n1,2.0\n")
        with pytest.raises(TraceFormatError):
            read_trace(path)

    def test_missing_file(self, tmp_path):
        """Missing trace files raise TraceFormatError"""
        with pytest.raises(TraceFormatError):
            read_trace(tmp_path / "absent.csv")


class TestReportFiles:
    """Test cases for experiment report CSVs"""

    def test_columns(self, tmp_path):
        """Header and one row per cell, inf spelled out"""
        report = ExperimentReport(cells=[
            ExperimentCell(system="sparse", axis="snr", axis_value=20.0, mse=0.0, psnr_db=math.inf, failures=0, seed=1),
        ])
        path = tmp_path / "report.csv"
        write_report(path, report)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(REPORT_COLUMNS)
        assert lines[1] == "sparse,snr,20.0,0.0,inf,0,1"


class TestHelpers:
    """Test cases for formatting and atomic writes"""

    @pytest.mark.parametrize("value, text", [(math.inf, "inf"), (-math.inf, "-inf"), (math.nan, "nan"), (0.1, "0.1")])
    def test_format_float(self, value, text):
        """Special values spelled out, others shortest round-trip"""
        assert format_float(value) == text

    def test_format_float_round_trip(self, rng):
        """float(format_float(x)) == x"""
        for value in rng.standard_normal(100):
            assert float(format_float(value)) == value

    def test_atomic_write_replaces(self, tmp_path):
        """Existing files are replaced and no temporaries remain"""
        path = tmp_path / "out" / "file.txt"
        atomic_write(path, "first")
        atomic_write(path, "second")
        assert path.read_text() == "second"
        assert [p.name for p in path.parent.iterdir()] == ["file.txt"]
