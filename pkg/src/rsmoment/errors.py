"""Exception types raised across the package."""


class RsMomentError(Exception):
    """Base class for all package errors."""


class PoleInputError(RsMomentError):
    """An argument sits on a pole of the function being evaluated."""


class PrecisionFailure(RsMomentError):
    """The achieved error estimate exceeds the requested accuracy."""


class DimensionZeroError(RsMomentError):
    """The cusp form space of the requested weight is trivial."""


class EigenvalueCollisionError(RsMomentError):
    """Hecke eigenvalues could not be separated."""


class InsufficientCoefficientsError(RsMomentError):
    """A Dirichlet series needs more coefficients than were supplied."""


class TruncationError(RsMomentError):
    """A truncated sum or integral did not reach its error budget."""


class QuadratureFailure(RsMomentError):
    """A numerical integral did not converge."""


class ContourError(RsMomentError):
    """A contour crosses or encloses a singularity it should avoid."""


class ExtrapolationDivergence(RsMomentError):
    """Successive probe values do not settle towards a limit."""


class TooCloseToPoleError(RsMomentError):
    """An evaluation point lies within the guard distance of a pole."""


class SummationBudgetExceeded(RsMomentError):
    """A sum needs more terms than the configured budget allows."""


class FunctionalEquationError(RsMomentError):
    """Gamma data or coefficients do not satisfy a functional equation."""


class DataParseError(RsMomentError):
    """An external data file is malformed."""


class DataValidationError(RsMomentError):
    """Ingested data parses but violates a structural invariant."""
