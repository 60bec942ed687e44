"""Exception types raised across the package.

Everything derives from CutoffLabError so callers can catch the package's
failures with a single except clause. Numeric failures carry enough context
in the message to name the operation that produced them.
"""

from __future__ import annotations


class CutoffLabError(Exception):
    """Base class for all errors raised by this package."""


class NotStochastic(CutoffLabError):
    """Kernel has a negative entry or a row sum off by more than 1e-9."""


class Reducible(CutoffLabError):
    """Kernel has more than one recurrent class; stationary law not unique."""


class NonPositiveStationary(CutoffLabError):
    """Solved stationary vector has a non-positive entry."""


class DimensionMismatch(CutoffLabError):
    """Vector or matrix shapes are incompatible."""


class BadChainFile(CutoffLabError):
    """Chain file cannot be parsed into a kernel."""


class NegativeTime(CutoffLabError):
    """Semigroup queried at t < 0."""


class NonIntegerDiscreteTime(CutoffLabError):
    """Discrete-time chain queried at a non-integer time."""


class StateExplosion(CutoffLabError):
    """Materializing a product chain would exceed the dense state cap."""


class AbsoluteContinuityViolated(CutoffLabError):
    """nu1 puts mass where nu2 does not and the divergence is undefined there."""


class NotTVType(CutoffLabError):
    """No closed-form total-variation sandwich is available for this divergence."""


class NonConvexDetected(CutoffLabError):
    """Second differences of the supplied f are negative on the audit grid."""


class RatioUnbounded(CutoffLabError):
    """f(x) / (|x-1|^p + |x-1|^q) grows without bound on the audit grid."""


class EigenSolveFailure(CutoffLabError):
    """Underlying eigensolver did not converge."""


class DegenerateSpectrum(CutoffLabError):
    """Spectral quantity undefined (single state, or modulus-one eigenvalue)."""


class NotSelfAdjoint(CutoffLabError):
    """Matrix expected to be self-adjoint in the pi-inner product is not."""


class BNotLessThanOne(CutoffLabError):
    """Spectrum enclosure statements require b < 1."""


class OptimizerDiverged(CutoffLabError):
    """Quotient optimizer produced a non-finite value."""


class StateCapExceeded(CutoffLabError):
    """Chain is larger than the configured optimization cap."""


class HorizonExceeded(CutoffLabError):
    """Curve never fell below the threshold within the search horizon."""

    def __init__(self, message: str, last_value: float | None = None):
        super().__init__(message)
        self.last_value = last_value


class InsufficientIndices(CutoffLabError):
    """Cutoff diagnosis needs at least four family indices."""


class COutOfRange(CutoffLabError):
    """Interpolation weight c must lie strictly between 0 and 1."""


class ParameterOutOfRange(CutoffLabError):
    """Numeric parameter outside its documented domain."""
