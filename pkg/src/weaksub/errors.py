"""Exception types shared across the package."""


class WeakSubError(Exception):
    pass


class DomainError(WeakSubError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(WeakSubError, ValueError):
    """Invalid algorithm or experiment configuration."""


class ResourceError(WeakSubError, RuntimeError):
    """An exhaustive computation would exceed its enumeration budget."""


class DegenerateDataError(DomainError):
    """Data for which the requested quantity is undefined (zero columns, f(S) = 0, ...)."""


class ConvergenceError(WeakSubError, RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class UndefinedMetricError(WeakSubError, ValueError):
    pass
