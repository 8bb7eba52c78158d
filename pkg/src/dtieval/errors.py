"""Exception types shared across the package."""


class DtiEvalError(Exception):
    """Base class for all package errors."""


class ConfigError(DtiEvalError):
    """Invalid configuration file or parameter set (CLI exit code 2)."""


class ParseError(ConfigError):
    def __init__(self, path, line_no, field, message):
        self.path = path
        self.line_no = line_no
        self.field = field
        super().__init__(f"{path}:{line_no}: field {field!r}: {message}")


class DuplicateId(ConfigError):
    pass


class NonMonotonicTime(ConfigError):
    pass


class NegativeWeight(ConfigError):
    pass


class AllZeroWeights(ConfigError):
    pass


class InvalidCoordinate(ConfigError):
    pass


class EmptyWindow(ConfigError):
    pass


class OutOfRange(DtiEvalError):
    """Interpolation time outside the trajectory's sampled span."""


class MissingContext(ConfigError):
    """A raw metric value has no scoring-context entry."""


class StoreCorrupt(DtiEvalError):
    """Rating store contains an unreadable record."""
