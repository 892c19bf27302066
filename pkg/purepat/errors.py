"""Exceptions raised by purepat, and the exit codes the CLI maps them to.

Exit codes
----------
- 0: success
- 1: unexpected failure
- 2: configuration / usage error (ConfigError, also argparse errors)
- 3: I/O error (OSError when reading data or writing outputs)
- 4: data error (DataError and subclasses)
- 5: arithmetic error (ScoreOverflowError)
"""


EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4
EXIT_ARITHMETIC = 5


class PurepatError(Exception):
    """Base class of all errors raised on purpose by purepat."""
    exit_code = EXIT_UNEXPECTED


# ============================== configuration ===============================


class ConfigError(PurepatError):
    """Invalid settings, flags, backend names or label mappings."""
    exit_code = EXIT_CONFIG


# ================================== data ====================================


class DataError(PurepatError):
    """Input data cannot be used as requested."""
    exit_code = EXIT_DATA


class EncodingError(DataError):
    """A cell cannot be encoded (e.g. non-numeric value in numeric column)."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyClassError(DataError):
    """One of the two classes has no instance left (training impossible)."""
    pass


class SchemaMismatchError(DataError):
    """Columns of a table do not match the ones of the trained schema."""

    def __init__(self, message, missing=(), extra=()):
        super().__init__(message)
        self.missing = list(missing)
        self.extra = list(extra)


class ArchiveError(DataError):
    """Model archive is malformed or internally inconsistent."""
    pass


# ============================ kernel contracts ==============================


class ShapeError(PurepatError, ValueError):
    """Packed rows/matrices with incompatible logical lengths or shapes."""
    exit_code = EXIT_DATA


class OutOfRangeError(PurepatError, IndexError):
    """Bit index outside of [0, L)."""
    exit_code = EXIT_DATA


class ContractError(PurepatError, ValueError):
    """Kernel called with arguments violating its contract."""
    pass


class ScoreOverflowError(PurepatError, ArithmeticError):
    """Integer score sums that would not fit in signed 64-bit words."""
    exit_code = EXIT_ARITHMETIC
