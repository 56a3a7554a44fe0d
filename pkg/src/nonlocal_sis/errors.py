"""Exception types raised by the solver suite.

Every failure mode that callers are expected to distinguish gets its own
class; all inherit from ModelError so blanket handling stays possible.
"""


class ModelError(Exception):
    """Base class for all package errors."""


class InvalidDomainError(ModelError):
    """Interval endpoints are not finite with a < b, or too few nodes."""


class LengthMismatchError(ModelError):
    """A nodal field does not have one value per mesh node."""


class NonpositiveParameterError(ModelError):
    """A parameter that must be strictly positive is not (diffusivity, rate, kernel width, N)."""


class KernelTooNarrowError(ModelError):
    """Kernel support spans fewer than two node spacings; the discrete operator degenerates."""


class KernelQuadratureError(ModelError):
    """Assembled kernel row sums violate the unit-mass bound (incommensurate support or short cutoff)."""


class AsymmetricOperatorError(ModelError):
    """A symmetric-only operation was called on a non-symmetric operator."""


class NonpositiveEigenvectorError(ModelError):
    """A computed principal eigenvector changes sign beyond tolerance."""


class SingularOperatorError(ModelError):
    """An operator that must be positive definite failed its factorization (internal)."""


class InvalidBracketError(ModelError):
    """A root bracket [lo, hi] has lo >= hi."""


class SubcriticalRegimeError(ModelError):
    """A positive steady state was requested where the linearization forbids one."""


class NoConvergenceError(ModelError):
    """An iteration hit its cap or lost its bracket ordering after retry."""


class AssumptionViolatedError(ModelError):
    """Input violates a standing assumption of the requested limit (e.g. low-risk domain)."""


class OutOfRangeError(ModelError):
    """A numeric argument lies outside its admissible range (e.g. dt above the stability bound)."""


class NegativeStateError(ModelError):
    """A compartment field is negative beyond the -1e-12 tolerance."""


class StepCollapseError(ModelError):
    """Time step was halved 20 times within one step without restoring positivity."""


class MassDriftError(ModelError):
    """Total population moved away from N by more than 1e-8 * N along a trajectory."""


class DivisionGuardError(ModelError):
    """A weighted distance was requested against an equilibrium with (near-)zero weights."""


class ConfigError(ModelError):
    """A scenario configuration is malformed or inconsistent."""
