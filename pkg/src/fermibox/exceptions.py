"""Error and warning types raised by the numerical routines."""


class FermiboxError(Exception):
    """Base class for all package errors."""


class ConfigError(FermiboxError, ValueError):
    """Invalid run configuration or invalid user input."""


class ZeroEnergyUnsupported(FermiboxError):
    pass


class NoConvergence(FermiboxError):
    pass


class RootIsolationFailure(FermiboxError):
    pass


class BranchAnchorTooLow(FermiboxError):
    pass


class PhaseUnwrapFailure(FermiboxError):
    pass


class SingularPencil(FermiboxError):
    pass


class MissedRootSuspected(FermiboxError):
    pass


class OdeStepFailure(FermiboxError):
    pass


class NuOnEigenvalue(FermiboxError):
    pass


class InsufficientSpectrum(FermiboxError):
    pass


class EigenvalueOutOfRange(FermiboxError):
    pass


class SingularShift(FermiboxError):
    pass


class NotPositiveDefinite(FermiboxError):
    pass


class SupportViolation(FermiboxError):
    pass


class SpectralCollision(FermiboxError):
    pass


class TruncationWarning(UserWarning):
    """Emitted when a truncated integral has a non-negligible tail.

    The estimated tail size is available as ``tail_error``.
    """

    def __init__(self, message, tail_error=0.0):
        super().__init__(message)
        self.tail_error = tail_error


class JumpPoint(FermiboxError, ValueError):
    """Energy sits on a discontinuity of the spectral shift function."""
