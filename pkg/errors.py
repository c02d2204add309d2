"""
Error types for the optomechanical force spectrometer.

Author: Christopher Orta
Date: 11/24/2025

Purpose: One small exception hierarchy shared by every module. Each class
carries the exit code the command line reports when it escapes a command.
"""


class SpectrometerError(Exception):
    """Base class for all toolkit failures."""
    exit_code = 1


class ConfigError(SpectrometerError):
    """Malformed or invalid input: configuration, parameters, data files."""
    exit_code = 2


class TruncationError(SpectrometerError):
    """A phonon truncation would exceed the configured hard cap."""
    exit_code = 2


class DimensionMismatchError(SpectrometerError):
    """A Franck-Condon table does not match the state or displacement."""
    exit_code = 2


class InferenceError(SpectrometerError):
    """The force could not be inferred from the supplied spectrum."""
    exit_code = 3


class EmptyPriorError(InferenceError):
    """No force branch falls inside the prior interval."""


class UnresolvedBranchError(InferenceError):
    """Two or more candidate branches fit the measurement equally well.

    The candidates are kept on the exception so callers can still report
    them.
    """
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class OracleRefusal(SpectrometerError):
    """The brute-force integrator cannot meet its validity constraints."""
    exit_code = 4


class NormDriftError(OracleRefusal):
    """Total probability drifted beyond tolerance during integration."""
