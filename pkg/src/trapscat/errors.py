"""Exception types shared across the package."""


class TrapscatError(Exception):
    """Base class for all package errors."""


class ParameterError(TrapscatError, ValueError):
    """A model parameter violates its admissible range."""


class DomainError(TrapscatError, ValueError):
    """An operation was requested outside its domain of validity."""


class UsageError(TrapscatError, TypeError):
    """Operands do not fit together (grid mismatch, wrong space tag, ...)."""


class GridOverflowError(TrapscatError, RuntimeError):
    """Wavepacket support left (or would leave) the periodic grid.

    Carries a `required_half_width` hint when one can be estimated.
    """

    def __init__(self, message, required_half_width=None):
        super().__init__(message)
        self.required_half_width = required_half_width


class CausticError(TrapscatError, RuntimeError):
    """Gaussian transport hit a (near-)caustic; split the map and retry."""


class ConfigError(TrapscatError, ValueError):
    """A run configuration failed to parse or validate."""


class ScanHoleError(TrapscatError, RuntimeError):
    """Too many samples of a scan failed."""
