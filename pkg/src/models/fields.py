"""Permeability fields, memory-kernel specifications and channel layouts."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.utils.validation_utils import validate_positive


@dataclass(frozen=True)
class PermeabilityField:
    """Per-fine-cell positive scalar field, stored as ``values[row, col]``.

    Row index runs along x2 and column index along x1, matching the
    row-major fine cell numbering of GridHierarchy.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"field values must be 2D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        if np.any(values <= 0):
            row, col = (int(k) for k in np.argwhere(values <= 0)[0])
            raise ValueError(
                f"field must be positive; cell (row={row}, col={col}) has value {values[row, col]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def fine_n(self) -> int:
        return self.values.shape[1]

    @property
    def cellwise(self) -> np.ndarray:
        """Values flattened in fine cell order."""
        return self.values.ravel()

    def scaled(self, factor: float) -> "PermeabilityField":
        return PermeabilityField(self.values * factor)

    @classmethod
    def constant(cls, n: int, value: float = 1.0) -> "PermeabilityField":
        return cls(np.full((n, n), float(value)))


@dataclass(frozen=True)
class KernelTerm:
    """One exponential term kappa_i(x) exp(-beta_i (t - s))."""

    field: PermeabilityField
    beta: float

    def __post_init__(self):
        validate_positive(self.beta, "beta")


@dataclass(frozen=True)
class KernelSpec:
    """Memory kernel A(x, t, s) as a sum of M exponential terms."""

    terms: Tuple[KernelTerm, ...]

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ValueError("kernel needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def M(self) -> int:
        return len(self.terms)

    @property
    def betas(self) -> List[float]:
        return [term.beta for term in self.terms]

    @property
    def fields(self) -> List[PermeabilityField]:
        return [term.field for term in self.terms]

    @classmethod
    def single(cls, field: PermeabilityField, beta: float) -> "KernelSpec":
        return cls((KernelTerm(field, beta),))


@dataclass(frozen=True)
class ChannelSpec:
    """Layout of a two-valued channelized field.

    Rectangles are half-open fine-cell index ranges ``(col0, col1, row0, row1)``.
    Random inclusions are square blocks of channel value placed with the
    run seed.
    """

    background: float = 1.0
    channel_value: float = 1.0e4
    rectangles: Tuple[Tuple[int, int, int, int], ...] = ()
    inclusions: int = 0
    inclusion_size: int = 2

    def __post_init__(self):
        validate_positive(self.background, "background")
        validate_positive(self.channel_value, "channel_value")
        if self.channel_value < self.background:
            raise ValueError(
                f"channel value {self.channel_value} must be >= background {self.background}"
            )
        if self.inclusions < 0 or self.inclusion_size < 1:
            raise ValueError("inclusion count must be >= 0 and size >= 1")
        object.__setattr__(self, "rectangles", tuple(tuple(r) for r in self.rectangles))

    @property
    def contrast(self) -> float:
        return self.channel_value / self.background


@dataclass(frozen=True)
class FieldStats:
    """Summary of a permeability field."""

    min: float
    max: float
    contrast: float
    channel_fraction: float
    source: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            "min": self.min,
            "max": self.max,
            "contrast": self.contrast,
            "channel_fraction": self.channel_fraction,
            "source": self.source,
        }
