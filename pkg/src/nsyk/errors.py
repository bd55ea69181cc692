"""Exception types raised across the package."""


class NSYKError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(NSYKError, ValueError):
    pass


class SymmetryViolationError(NSYKError):
    """Operator does not commute with the symmetry it is projected on."""


class NonHermitianInputError(NSYKError):
    pass


class InsufficientDataError(NSYKError):
    pass


class DegenerateSpectrumError(NSYKError):
    pass


class NoRampError(NSYKError):
    """Form factor has no detectable linear ramp."""


class NoThoulessTimeError(NSYKError):
    pass


class FitFailureError(NSYKError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResolutionError(NSYKError):
    """Finite-difference grid too coarse for the requested check."""


class ScanRangeError(NSYKError):
    pass


class CorruptionError(NSYKError):
    """A persisted record does not match the expected header."""
