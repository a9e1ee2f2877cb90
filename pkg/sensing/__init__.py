"""Design of robust row-sparse structured sensing matrices and their benchmarks."""

__version__ = "1.0.0"
