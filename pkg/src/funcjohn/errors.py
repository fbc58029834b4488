"""Exception types raised by the library."""


class FuncJohnError(Exception):
    """Base class for all library errors."""


class EmptySubdifferential(FuncJohnError):
    """psi has no finite subgradient at the query point."""


class DegenerateSpan(FuncJohnError):
    """Atoms of an inner body do not affinely span the space."""


class IntegralDiverges(FuncJohnError):
    """The requested s-integral could not be shown finite."""


class EnvelopeNotFound(FuncJohnError):
    """No exponential decay envelope was found within the search budget."""


class SingularMatrix(FuncJohnError):
    """A matrix that must be invertible is (numerically) singular."""

    def __init__(self, message, critical_t=None):
        super().__init__(message)
        self.critical_t = critical_t


class StarLikeViolation(FuncJohnError):
    """A subgradient p at u has 1 + <p, u> <= 0, so the normal cannot be normalized."""

    def __init__(self, message, point=None, subgradient=None):
        super().__init__(message)
        self.point = point
        self.subgradient = subgradient


class FlatZeroInconclusive(FuncJohnError):
    """The numeric flat-zero test did not settle within its budget."""


class ZeroValue(FuncJohnError):
    """The function vanishes where a positive value is required."""


class NumericalFailure(FuncJohnError):
    """The inner convex solver failed."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump


class LineSearchFailed(FuncJohnError):
    """No step along a separating direction improved the objective feasibly."""


class MissingSubgradient(FuncJohnError):
    """A non-horizontal contact pair lacks its generating subgradient."""


class NotIndicatorInstance(FuncJohnError):
    """The classical reduction needs indicator functions on both sides."""


class ScenarioError(FuncJohnError):
    """Malformed or inconsistent scenario input."""
