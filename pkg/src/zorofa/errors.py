"""Exception types shared across the package."""


class ZorofaError(Exception):
    pass


class BudgetExhausted(ZorofaError):
    """Raised by a counting oracle once its evaluation budget is spent."""


class DimensionMismatch(ZorofaError, ValueError):
    pass


class DomainError(ZorofaError, ValueError):
    pass


class TooManyRows(ZorofaError, ValueError):
    pass


class GateViolation(ZorofaError):
    """The compressed-sensing path was requested with m >= n."""


class ConfigInfeasible(ZorofaError, ValueError):
    pass


class UnknownProblem(ZorofaError, KeyError):
    pass


class IncompatibleDimension(ZorofaError, ValueError):
    pass


class MissingCoverage(ZorofaError, ValueError):
    pass


class NoAnalyticGradient(ZorofaError):
    pass
