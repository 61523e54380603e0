"""Trajectory foot points and bilinear evaluation of stored levels."""

from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from src.models.grid import GridHierarchy
from src.models.memory import FootPoint


def trajectory_foot(x: np.ndarray, t: float, s: float, velocity_tilde: Sequence[float]) -> FootPoint:
    """x - (t - s) a~ for a constant velocity, flagging points that leave the unit square.

    Raises:
        ValueError: If s > t or s < 0
    """
    if s > t:
        raise ValueError(f"foot point needs s <= t, got s={s}, t={t}")
    if s < 0:
        raise ValueError(f"foot point needs s >= 0, got s={s}")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    points = x - (t - s) * np.asarray(velocity_tilde, dtype=float)
    outside = np.any((points < 0.0) | (points > 1.0), axis=-1)
    return FootPoint(points=points, outside=outside)


def level_interpolator(grid: GridHierarchy, values: np.ndarray) -> RegularGridInterpolator:
    """Bilinear interpolant of fine nodal values, zero outside the unit square."""
    axis = np.linspace(0.0, 1.0, grid.fine_n + 1)
    side = grid.fine_n + 1
    table = np.asarray(values, dtype=float).reshape(side, side)
    return RegularGridInterpolator((axis, axis), table, method="linear", bounds_error=False, fill_value=0.0)


def evaluate_history(grid: GridHierarchy, values: np.ndarray, foot: FootPoint) -> np.ndarray:
    """u^k at the foot points; points outside the domain read zero."""
    interpolator = values if isinstance(values, RegularGridInterpolator) else level_interpolator(grid, values)
    # table rows run along x2
    result = interpolator(foot.points[:, ::-1])
    result[foot.outside] = 0.0
    return result
