"""Exception types shared across the package."""


class LmgcError(Exception):
    """Base class for all package errors."""


class ConfigError(LmgcError):
    """Invalid configuration value (bad scheme, model spec, generator spec...)."""


class FormatError(LmgcError):
    """Malformed on-disk or in-memory data.

    ``offset`` carries the byte/symbol position of the first violation when
    it is known, else None.
    """

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (offset {offset})")
        self.offset = offset


class VerificationError(LmgcError):
    """Round-trip or digest check failed; the output cannot be trusted."""


class WindowFullError(LmgcError):
    """Context window exhausted; caller must reset the model state."""


class BridgeUnavailableError(LmgcError):
    """The external model server cannot be reached or answered garbage."""
