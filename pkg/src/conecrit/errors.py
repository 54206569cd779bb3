"""Exception types shared across the package."""


class ConeCritError(Exception):
    """Base class for all package errors."""


class PreconditionError(ConeCritError, ValueError):
    """An input violates the documented precondition of an operation."""


class EmptyDomainError(PreconditionError):
    """Shrinking consumed the whole angular domain."""


class MeshTooCoarseError(PreconditionError):
    pass


class SpectralFloorError(PreconditionError):
    """Eigenvalue at or below the Hardy floor -(N-2)^2/4."""


class SubcriticalError(PreconditionError):
    """Exponent at or below the critical exponent where a supersolution is requested."""


class NeverEllipticError(ConeCritError):
    pass


class ConvergenceError(ConeCritError, ArithmeticError):
    """An iterative method stopped without meeting its tolerance."""


class OrderingViolation(ConeCritError):
    """A monotone iterate left the interval between sub- and supersolution."""


class GapFailure(ConeCritError):
    pass


class SearchExhausted(ConeCritError):
    pass
