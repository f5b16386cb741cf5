"""
Exception hierarchy for rmhd-esdg.
Every failure raised by the core package derives from RMHDError.
"""


class RMHDError(Exception):
    """Base class for solver errors."""


class InadmissibleStateError(RMHDError, ValueError):
    """
    Raised when a state violates rho > 0, p > 0, |v| < 1
    (or an EOS / boost parameter is out of range).
    """


class RecoveryError(InadmissibleStateError):
    """
    Conserved-to-primitive recovery failed.
    `indices` holds the flat indices of the failing states.
    """

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = [] if indices is None else list(indices)


class FluxInvariantError(RMHDError):
    """Internal invariant of the entropy conservative flux violated."""


class LimiterError(RMHDError):
    """The positivity limiter cannot rescue a cell (inadmissible average)."""


class NumericalBlowupError(RMHDError):
    """NaN or Inf detected in the evolved field."""


class ConfigError(RMHDError, ValueError):
    """Invalid run configuration, preset or variable name."""
