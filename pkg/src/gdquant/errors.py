"""Exception hierarchy shared by all gdquant modules."""


class GdquantError(Exception):
    """Base class for every error raised by gdquant."""


class ValidationError(GdquantError, ValueError):
    """A system definition violates one or more structural requirements.

    ``violations`` lists every problem found, as ``(kind, message)`` pairs,
    so callers can report all of them at once instead of one per run.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)

    @property
    def kinds(self):
        return [kind for kind, _ in self.violations]


class RowNotStochastic(ValidationError):
    pass


class FanOutBelowTwo(ValidationError):
    pass


class RatioSupportMismatch(ValidationError):
    pass


class RatioOutOfRange(ValidationError):
    pass


class InitialNotPositiveProbability(ValidationError):
    pass


class InadmissibleWord(GdquantError, ValueError):
    pass


class InadmissibleJunction(InadmissibleWord):
    pass


class CapExceeded(GdquantError):
    """Antichain construction would exceed the cardinality cap."""

    def __init__(self, message, partial_count):
        super().__init__(message)
        self.partial_count = partial_count


class IncompleteAntichain(GdquantError, ValueError):
    pass


class UnknownComponent(GdquantError, KeyError):
    pass


class SolverError(GdquantError, ArithmeticError):
    pass


class NonConvergence(SolverError):
    pass


class TrivialComponent(SolverError):
    pass


class InsufficientLevels(GdquantError, ValueError):
    pass


class SeparationInfeasible(GdquantError, ValueError):
    def __init__(self, message, row, max_t):
        super().__init__(message)
        self.row = row
        self.max_t = max_t


class InvalidN(GdquantError, ValueError):
    pass


class ResolutionTooCoarse(GdquantError):
    pass
