"""
Exception hierarchy for the sensing-matrix designer.

Library code raises these; only the command-line front end turns them into
exit codes.
"""
from typing import List, Optional


class SensingError(Exception):
    """Base class for every error raised by the package"""


class InvalidDimensionError(SensingError, ValueError):
    """Matrix inputs are malformed or do not fit together"""


class InvalidParameterError(SensingError, ValueError):
    """A scalar parameter lies outside its admissible range"""


class ZeroColumnError(InvalidDimensionError):
    """A column with (numerically) zero Euclidean norm"""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} has zero norm")


class NumericDivergenceError(SensingError, ArithmeticError):
    """The design objective stopped being finite"""

    def __init__(self, iteration: int, value: float):
        self.iteration = iteration
        self.value = value
        super().__init__(f"objective became non-finite ({value}) at iteration {iteration}")


class StepSearchError(SensingError, ArithmeticError):
    """Backtracking ran out of halvings without sufficient decrease"""

    def __init__(self, halvings: int, eta: float):
        self.halvings = halvings
        self.eta = eta
        super().__init__(
            f"no step satisfied sufficient decrease after {halvings} halvings (last eta={eta:.3e})"
        )


class DegenerateDictionaryError(SensingError, ValueError):
    """Every column of the dictionary is zero"""


class MatrixFormatError(SensingError, ValueError):
    """A matrix file could not be decoded"""


class TraceFormatError(SensingError, ValueError):
    """A trace CSV is malformed"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ConfigError(SensingError):
    """Configuration file or overrides failed validation"""

    def __init__(self, messages: List[str]):
        self.messages = messages
        super().__init__("; ".join(messages))
