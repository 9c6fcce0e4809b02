"""Exception hierarchy shared by the geometry, walk and analysis layers."""


class DiskwalkError(Exception):
    """Base class for all package errors."""


class DomainError(DiskwalkError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleSingularityError(DomainError):
    """A point coincides with one of the poles +alpha / -alpha."""


class DegenerateCircleError(DomainError):
    """The orbit circle through the poles and z degenerates to a line."""


class PoleMismatchError(DiskwalkError, ValueError):
    """Group elements built on different poles were combined."""


class ConfigError(DiskwalkError, ValueError):
    """Malformed step law, ensemble configuration or CLI config."""


class NotApplicableError(DiskwalkError):
    """The statistic does not apply to this regime (e.g. zero drift)."""


class PreconditionError(DiskwalkError):
    """A statistical precondition of the estimator is violated."""


class PartialResultError(DiskwalkError):
    """An ensemble run stopped early; ``completed`` trajectories finished."""

    def __init__(self, message, completed):
        super().__init__(message)
        self.completed = completed
