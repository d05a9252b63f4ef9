"""Exception hierarchy shared by all modules."""


class CayleyMoserError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CayleyMoserError, ValueError):
    """An argument lies outside the domain of the operation."""


class TailNotIntegrable(CayleyMoserError, ValueError):
    """E[X+] is infinite for the requested family parameters."""


class SecondMomentInfinite(CayleyMoserError, ValueError):
    """A variance-type quantity was requested but E[X+^2] is infinite."""


class MomentInfinite(CayleyMoserError, ValueError):
    pass


class MgfInfinite(CayleyMoserError, ValueError):
    pass


class NoDensity(CayleyMoserError, ValueError):
    """The offer or residual law is not absolutely continuous."""


class NotIncreasing(CayleyMoserError, ValueError):
    pass


class NotConcave(CayleyMoserError, ValueError):
    pass


class RateTooSmall(CayleyMoserError, ValueError):
    pass


class UnknownTail(CayleyMoserError, ValueError):
    pass


class NotApplicable(CayleyMoserError, ValueError):
    pass


class StepUnderflow(CayleyMoserError, ArithmeticError):
    pass


class TooFewSamples(CayleyMoserError, ValueError):
    pass


class EmptyBatch(CayleyMoserError, ValueError):
    pass


class UnknownFigure(CayleyMoserError, KeyError):
    pass


class NonPositiveValue(DomainError):
    """A regular-variation probe returned a value <= 0."""
