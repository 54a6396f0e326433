"""Exception types raised across the package."""


class SumphaseError(ValueError):
    """Base class for all domain errors."""


class ZeroCoefficient(SumphaseError):
    pass


class ArityTooSmall(SumphaseError):
    pass


class OffsetOutOfRange(SumphaseError):
    pass


class BadProbability(SumphaseError):
    pass


class TooLarge(SumphaseError):
    """The requested enumeration exceeds its size cap."""


class WrongRegime(SumphaseError):
    pass


class ArityMismatch(SumphaseError):
    pass


class PreconditionViolated(SumphaseError):
    pass


class EpsilonNonpositive(SumphaseError):
    """Var(W)/E[W] - 1 is not positive, so the lower bound does not apply."""


class InfeasibleCell(SumphaseError):
    pass


class AmbiguousRegime(SumphaseError):
    pass
