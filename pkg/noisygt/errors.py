# noisygt/errors.py


class GroupTestingError(Exception):
    """Base class for every contract violation raised by noisygt."""


class DimensionMismatchError(GroupTestingError, ValueError):
    pass


class ParameterRangeError(GroupTestingError, ValueError):
    pass


class ColumnWeightError(GroupTestingError, ValueError):
    """The matrix does not have uniform column weight, so it is not a codeword graph."""


class FormatError(GroupTestingError, ValueError):
    pass


class InvalidFieldOrderError(GroupTestingError, ValueError):
    pass


class InfeasibleParametersError(GroupTestingError):
    pass


class SearchExhaustedError(GroupTestingError):
    pass


class BudgetExceededError(GroupTestingError):
    pass


class EnumerationCapError(BudgetExceededError):
    pass
