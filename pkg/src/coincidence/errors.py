"""Exception hierarchy shared by the solver modules."""


class CouplingError(Exception):
    """Base class for every error raised by this package."""


class InvalidMarginal(CouplingError, ValueError):
    """A weight vector cannot be turned into a :class:`Marginal`."""


class EmptyMarginal(InvalidMarginal):
    pass


class NonPositiveWeight(InvalidMarginal):
    pass


class NotNormalized(InvalidMarginal):
    pass


class ZeroWeight(InvalidMarginal):
    """A constructed margin ended up with a zero coordinate."""


class MarginalMismatch(CouplingError, ValueError):
    """Matrix sums disagree with the margins it claims to couple."""


class InvariantViolation(CouplingError, RuntimeError):
    """A solver invariant failed; points to a bug or a pathological input."""


class NoConvergence(CouplingError, RuntimeError):
    pass


class NoAdmissibleIndex(CouplingError, RuntimeError):
    pass


class DegenerateCorner(CouplingError, ValueError):
    pass


class NotEligible(CouplingError, ValueError):
    """The closed rectangle form produced a negative entry."""


class ConditionHViolated(CouplingError, ValueError):
    pass
