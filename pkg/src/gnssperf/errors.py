"""Exception taxonomy shared across the package."""


class GnssPerfError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GnssPerfError, ValueError):
    """Operation preconditions violated (length mismatch, empty buffer, bad range)."""


class InvalidConfigError(GnssPerfError, ValueError):
    """Configuration violates a documented invariant (e.g. loop stability guard)."""


class DegenerateInputError(GnssPerfError, ValueError):
    """Input is formally valid but carries no usable information (all-zero correlators)."""


class FormatError(GnssPerfError, ValueError):
    """File or config format violation: bad magic, truncated payload, unknown key."""


class ResourceError(GnssPerfError, RuntimeError):
    """Worker or process startup failed."""


class PipelineError(GnssPerfError, RuntimeError):
    """A channel task raised; carries channel attribution."""

    def __init__(self, channel_id, message):
        super().__init__(f"channel {channel_id}: {message}")
        self.channel_id = channel_id
