"""Exception hierarchy shared by every module of the package."""


class RobustECDError(Exception):
    """Base class for all package errors."""


class ParseError(RobustECDError, ValueError):
    """A line of an edge-list or label file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyGraphError(RobustECDError, ValueError):
    pass


class LabelConflictError(RobustECDError, ValueError):
    pass


class CoverageError(RobustECDError, ValueError):
    pass


class ModificationError(RobustECDError, ValueError):
    """A modification scheme is not valid against its target graph."""


class CapacityError(RobustECDError, ValueError):
    """More items were requested than the sampling universe holds."""


class UndefinedMetricError(RobustECDError, ValueError):
    pass


class ConvergenceError(RobustECDError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PlugError(RobustECDError, ValueError):
    """An external partition could not be bound to the graph."""


class CapExceededError(RobustECDError, RuntimeError):
    pass


class ConfigError(RobustECDError, ValueError):
    pass


class EnsembleError(RobustECDError, ValueError):
    pass


class EnhancementError(RobustECDError, RuntimeError):
    pass


class RegistryError(RobustECDError, KeyError):
    pass


class ExperimentError(RobustECDError, RuntimeError):
    pass
