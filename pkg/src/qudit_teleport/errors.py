"""Exception types raised by the package."""


class QuditTeleportError(Exception):
    """Base class for all package errors."""


class InvalidDimension(QuditTeleportError, ValueError):
    pass


class InvalidIndex(QuditTeleportError, IndexError):
    pass


class ShapeError(QuditTeleportError, ValueError):
    pass


class InvalidState(QuditTeleportError, ValueError):
    pass


class InvalidSpectrum(QuditTeleportError, ValueError):
    pass


class LinearlyDependentError(QuditTeleportError, ValueError):
    """The nu-family of a spectrum with zero coefficients cannot be discriminated unambiguously."""

    def __init__(self, zero_indices, message=None):
        self.zero_indices = tuple(zero_indices)
        if message is None:
            message = (
                "spectrum is linearly dependent: coefficients at indices "
                f"{list(self.zero_indices)} are zero"
            )
        super().__init__(message)


class OracleUnsupported(QuditTeleportError, ValueError):
    pass


class UnsupportedPriors(QuditTeleportError, ValueError):
    pass


class InternalConsistencyError(QuditTeleportError, RuntimeError):
    """A numerical identity that must hold by construction was violated."""


class InvalidCoefficients(QuditTeleportError, ValueError):
    pass


class InvalidGrid(QuditTeleportError, ValueError):
    pass
