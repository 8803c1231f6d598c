# utils/errors.py

"""
Exception hierarchy. Each family carries the CLI exit code it maps to.
"""


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""
    exit_code = 1


# --- Configuration / input errors (exit 2) ---

class ConfigError(ToolkitError):
    exit_code = 2


class NonPositiveSpan(ConfigError):
    pass


class TooFewPoints(ConfigError):
    pass


class UnsupportedOrder(ConfigError):
    pass


class FormatError(ConfigError):
    """Bad magic, unknown version or malformed row in a data file."""
    pass


# --- Numeric errors (exit 3) ---

class NumericError(ToolkitError):
    exit_code = 3


class GridMismatch(NumericError):
    pass


class ShiftOutOfGrid(NumericError):
    pass


class NonSquareGrid(NumericError):
    pass


class NotNormalized(NumericError):
    pass


class DecompositionFailure(NumericError):
    pass


class RankOutOfRange(NumericError):
    pass


class NonRealResult(NumericError):
    pass


class EmptyDistribution(NumericError):
    pass


class EmptyHistogram(NumericError):
    pass


class NegativeInput(NumericError):
    pass


class DegenerateCenters(NumericError):
    pass


class EmptyCounts(NumericError):
    pass


# --- Fit errors (exit 4) ---

class FitError(ToolkitError):
    exit_code = 4


class NoConvergence(FitError):
    """Raised with the last iterate so callers can still report it."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class SingularJacobian(FitError):
    pass


# --- Disambiguation (exit 5) ---

class Ambiguous(ToolkitError):
    exit_code = 5

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
