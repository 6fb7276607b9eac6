"""Exception types raised across the package."""


class CombctlError(Exception):
    """Base class for all package errors."""


class DimensionError(CombctlError, ValueError):
    pass


class NotHermitianError(CombctlError, ValueError):
    pass


class NotUnitaryError(CombctlError, ValueError):
    pass


class NotCPError(CombctlError, ValueError):
    pass


class NotTPError(CombctlError, ValueError):
    pass


class InvalidStateError(CombctlError, ValueError):
    pass


class InvalidCoherenceError(CombctlError, ValueError):
    """Coherence operator outside the Kraus span or above the norm bound."""


class PreconditionError(CombctlError, ValueError):
    pass


class BudgetError(CombctlError, ValueError):
    """Requested object would exceed the dense-memory budget."""
