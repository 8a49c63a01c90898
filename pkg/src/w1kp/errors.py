"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: OSError -> 1, CapacityError -> 3,
everything else below -> 2.
"""


class W1kpError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(W1kpError):
    """Input violates a documented precondition or invariant."""


class FormatError(ValidationError):
    """File content does not match the declared on-disk format."""


class CapacityError(W1kpError):
    """Request exceeds an enumeration or sampling budget."""


class CalibrationError(W1kpError):
    """Cutoff fitting produced no valid strictly-ordered thresholds."""


class UndefinedCorrelationError(ValidationError):
    """Correlation is undefined (zero rank variance in an input)."""
