"""Exception types raised by the memsplit toolkit."""

from typing import Optional


class MemsplitError(Exception):
    """Base class for all toolkit errors."""


class GridSizeError(MemsplitError, ValueError):
    """Grid counts are zero, too small or overflow the index range."""


class FieldFormatError(MemsplitError, ValueError):
    """A field or medium file does not follow the documented format."""


class SingularSystemError(MemsplitError, RuntimeError):
    """A linear or saddle-point system could not be factorized."""


class RankDeficiencyError(MemsplitError, RuntimeError):
    """A basis or constraint matrix is rank deficient."""

    def __init__(self, message: str, condition_number: Optional[float] = None):
        super().__init__(message)
        self.condition_number = condition_number


class StabilityBoundError(MemsplitError, ValueError):
    """The time step exceeds the stability bound of the partially explicit scheme."""

    def __init__(self, message: str, bound: float):
        super().__init__(message)
        self.bound = bound


class ResidualToleranceError(MemsplitError, RuntimeError):
    """A computed quantity fails its defining equations beyond tolerance."""
