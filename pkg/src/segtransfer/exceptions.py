"""Exception hierarchy for segtransfer."""

from typing import Iterable, List


class SegTransferError(Exception):
    """Base class for all segtransfer errors."""


class RejectedInputError(SegTransferError, ValueError):
    """Input is malformed: wrong shape, out-of-range values, unknown names."""


class DegenerateInputError(SegTransferError, ValueError):
    """Input is well-formed but the requested quantity is undefined for it."""


class UnknownAttackError(RejectedInputError):
    """An attack name that is not registered."""

    def __init__(self, name: str, registered: Iterable[str]):
        self.name = name
        self.registered = sorted(registered)
        super().__init__(
            f"Unknown attack '{name}'. Registered attacks: {', '.join(self.registered)}"
        )


class ConfigValidationError(SegTransferError):
    """Experiment configuration failed validation."""

    def __init__(self, issues: List[str]):
        self.issues = list(issues)
        super().__init__("Invalid configuration:\n  - " + "\n  - ".join(self.issues))


class ResultsSchemaError(SegTransferError):
    """A results document does not match the supported schema version."""


class DatasetError(SegTransferError):
    """No usable image/label pairs could be loaded."""
