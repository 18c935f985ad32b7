"""Exception types shared across the package.

The CLI maps these onto its exit codes: ConfigError -> 2, CapExceeded -> 3,
anything else -> 4.
"""


class SkewmixError(Exception):
    """Base class for package errors."""


class ConfigError(SkewmixError):
    """Invalid configuration or input file; carries the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class CapExceeded(SkewmixError):
    """An exhaustive enumeration would exceed the configured cap."""

    def __init__(self, needed, cap):
        self.needed = needed
        self.cap = cap
        super().__init__(f"enumeration of {needed} states exceeds cap {cap}")
