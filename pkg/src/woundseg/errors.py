"""Exception types shared across the toolkit."""


class WoundsegError(Exception):
    """Base class for toolkit errors."""


class CorruptImageError(WoundsegError):
    """An image file could not be decoded."""

    def __init__(self, path, detail=""):
        self.path = str(path)
        msg = f"cannot decode image: {self.path}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ConsistencyError(WoundsegError):
    """Internal invariants violated (e.g. a group references an unknown id)."""


class ConfigError(WoundsegError):
    """Invalid configuration value or unknown config key."""


class ContractError(WoundsegError):
    """Caller violated an operation precondition (shape/type mismatch)."""


class WeightArchiveError(WoundsegError):
    """Weight archive is damaged or does not match the target network."""


class InferenceError(WoundsegError):
    """Model produced unusable output (non-finite logits)."""
