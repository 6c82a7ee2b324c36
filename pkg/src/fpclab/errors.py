"""Exception types shared across the lab.

Every precondition failure raises a named error so harness code and tests
can distinguish misconfiguration from genuine statistical outcomes.
"""


class FpcLabError(ValueError):
    """Base class for all lab errors."""


# -- finite field -------------------------------------------------------------

class NonPrimeModulus(FpcLabError):
    pass


class ModulusTooSmall(FpcLabError):
    pass


class DuplicatePoint(FpcLabError):
    pass


class ArityMismatch(FpcLabError):
    pass


class FieldMismatch(FpcLabError):
    pass


class FieldExhausted(FpcLabError):
    pass


# -- codes --------------------------------------------------------------------

class InvalidCoalition(FpcLabError):
    pass


class InvalidSecurity(FpcLabError):
    pass


class LengthMismatch(FpcLabError):
    pass


# -- problems / encodings -----------------------------------------------------

class EmptyDatabase(FpcLabError):
    pass


class DimensionMismatch(FpcLabError):
    pass


class FieldTooSmall(FpcLabError):
    pass


class NotBinary(FpcLabError):
    pass


class IncompleteShares(FpcLabError):
    pass


# -- oracles / solvers / adversaries -------------------------------------------

class IndexOutOfRange(FpcLabError):
    pass


class WrongMode(FpcLabError):
    pass


class PreconditionUnmet(FpcLabError):
    pass


class SampleExceedsPopulation(FpcLabError):
    pass


class OutputDimensionMismatch(FpcLabError):
    pass


class QueryBudgetExceeded(FpcLabError):
    pass


class CommitBudgetExceeded(FpcLabError):
    pass


# -- experiments ----------------------------------------------------------------

class ConfigInvalid(FpcLabError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
