class PowerTrendError(Exception):
    """Base class for all package errors."""


class DataError(PowerTrendError, ValueError):
    """Input data is missing, unparsable or violates a bar invariant."""


class WarmupError(PowerTrendError, ValueError):
    """Series too short for an indicator's warm-up."""


class DegenerateError(PowerTrendError, ArithmeticError):
    """A computation has no meaningful answer (zero variance, zero base)."""
