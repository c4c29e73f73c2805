"""Exception hierarchy.

Everything raised on purpose by this package derives from :class:`HRGMError`.
Errors that describe an invalid *model* (as opposed to a malformed file or a
bad option) derive from :class:`DomainError`; the command line maps those to
exit code 3.
"""


class HRGMError(Exception):
    """Base class for all package errors."""


class ConfigError(HRGMError, ValueError):
    """Invalid option value (tolerance, probability level, ...)."""


class ParseError(HRGMError, ValueError):
    """A matrix, graph or CSV file could not be parsed."""


class DomainError(HRGMError, ValueError):
    """Input is well formed but violates a mathematical precondition."""


class DimensionMismatch(DomainError):
    pass


# graphs
class NotConnected(DomainError):
    pass


class NotDecomposable(DomainError):
    pass


class NotBlockGraph(DomainError):
    pass


class CompleteGraph(DomainError):
    pass


# matrices
class NonzeroDiagonal(DomainError):
    pass


class NotConditionallyNegativeDefinite(DomainError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NotPSD(DomainError):
    pass


class NonzeroRowSums(DomainError):
    pass


class WrongRank(DomainError):
    pass


class NotPD(DomainError):
    pass


class Singular(DomainError):
    pass


class DimensionTooSmall(DomainError):
    pass


class NonPositive(DomainError):
    pass


class NotInCone(DomainError):
    pass


# completion
class NotPartiallyCND(DomainError):
    pass


class EmptySeparator(DomainError):
    pass


class InitMismatch(DomainError):
    pass


class NoConvergence(HRGMError):
    """Cyclic completion hit its iteration budget.

    The best iterate is attached as ``report`` so callers can still inspect it.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# data / sampling
class NotInSupport(DomainError):
    pass


class DegenerateColumn(DomainError):
    pass


class TooFewExceedances(DomainError):
    pass


class NeedsFullInit(DomainError):
    pass


class RejectionBudgetExceeded(HRGMError):
    pass
