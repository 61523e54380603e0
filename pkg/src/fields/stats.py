"""Summary statistics and bound checks of permeability fields."""

from typing import Optional, Tuple

import numpy as np

from src.models.fields import FieldStats, PermeabilityField
from src.models.grid import GridHierarchy
from src.utils.logging import logger


def field_stats(field: PermeabilityField, source: Optional[str] = None) -> FieldStats:
    """min, max, contrast and the share of cells above the geometric midpoint."""
    low = float(field.values.min())
    high = float(field.values.max())
    contrast = high / low
    if contrast > 1.0:
        channel_fraction = float(np.mean(field.values > np.sqrt(low * high)))
    else:
        channel_fraction = 0.0
    return FieldStats(min=low, max=high, contrast=contrast,
                      channel_fraction=channel_fraction, source=source)


def check_field_bounds(
    field: PermeabilityField,
    grid: Optional[GridHierarchy] = None,
    lower: Optional[float] = None,
    upper: Optional[float] = None,
) -> Tuple[float, float]:
    """Return (C0, C_inf) of a field entering a solver.

    Raises:
        ValueError: If the field does not match the grid or leaves the given bounds
    """
    if grid is not None and field.shape != (grid.fine_n, grid.fine_n):
        msg = f"field shape {field.shape} does not match the {grid.fine_n}x{grid.fine_n} fine grid"
        logger.error(msg)
        raise ValueError(msg)
    c0, c_inf = float(field.values.min()), float(field.values.max())
    if (lower is not None and c0 < lower) or (upper is not None and c_inf > upper):
        msg = f"field range [{c0}, {c_inf}] leaves the admissible range [{lower}, {upper}]"
        logger.error(msg)
        raise ValueError(msg)
    logger.info("Field bounds", extra={"C0": c0, "C_inf": c_inf, "contrast": c_inf / c0})
    return c0, c_inf
