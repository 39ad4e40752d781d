"""Exception types shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class ParseError(SimError):
    """Scenario file could not be read or parsed."""


class SchemaError(SimError):
    """Scenario document is missing fields or carries unknown keys."""

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = list(fields)


class RangeError(SimError, ValueError):
    """A value lies outside its permitted range."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DomainError(SimError, ValueError):
    """A function was called outside its mathematical domain."""


class TargetUnavailable(SimError):
    """Handover target is in depletion outage."""


class PairingError(SimError):
    """Policy result groups were not run over the same seeds."""


class IoError(SimError, OSError):
    """Output could not be written."""
