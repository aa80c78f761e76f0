"""Exception hierarchy shared across the toolkit."""


class ObenchError(Exception):
    """Base class for all domain errors raised by this package."""


class ValidationError(ObenchError):
    """A value violates a structural or coordinate invariant."""


class ObgParseError(ObenchError):
    """A grid or track file could not be parsed.

    Carries the name of the offending field so callers can report
    precisely what is wrong with the file.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class EmptyDomainError(ObenchError):
    """A domain selection matched no samples."""


class KindMismatchError(ObenchError):
    """Pipeline steps whose value kinds do not chain."""


class ConfigError(ObenchError):
    """A pipeline configuration failed strict parsing or validation."""


class UnresolvedScaleError(ObenchError):
    """A PSD score curve never reaches the resolution threshold."""


class StepExecutionError(ObenchError):
    """A pipeline step failed; records the step index and cause."""

    def __init__(self, index: int, op: str, cause: Exception):
        self.index = index
        self.op = op
        self.cause = cause
        super().__init__(f"step {index} ({op}): {cause}")
