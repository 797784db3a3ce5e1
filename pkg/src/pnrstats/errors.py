"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented process status without a lookup table.
"""

from __future__ import annotations


class PnrStatsError(Exception):
    """Base class for all package errors."""

    exit_code = 1


# -- configuration (exit 2) -------------------------------------------------

class ConfigError(PnrStatsError, ValueError):
    exit_code = 2


class InvalidSpec(ConfigError):
    """A source, detector or material description violates its ranges."""


# -- I/O (exit 3) -----------------------------------------------------------

class ShotIOError(PnrStatsError, OSError):
    exit_code = 3


class ParseError(ShotIOError):
    """Malformed shot file. ``line`` is 1-based and counts the header."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


# -- numeric / estimator (exit 4) -------------------------------------------

class NumericError(PnrStatsError, ArithmeticError):
    exit_code = 4


class ZeroMean(NumericError):
    """Estimator normalised by the sample mean received an all-zero series."""


class NegativeMean(NumericError, ValueError):
    pass


class LengthMismatch(NumericError, ValueError):
    pass


class OutOfRange(NumericError, ValueError):
    pass


class DegenerateRange(NumericError):
    """All analog values coincide, so no histogram range exists."""


class NoPeaks(NumericError):
    pass


class IrregularSpacing(NumericError):
    pass
