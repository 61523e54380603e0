"""Synthetic high-contrast channelized permeability fields."""

from typing import Sequence, Tuple

import numpy as np

from src.models.fields import ChannelSpec, PermeabilityField
from src.models.grid import GridHierarchy
from src.utils.logging import logger

# channel layouts in unit-square coordinates (x0, x1, y0, y1)
_EXAMPLE1_CHANNELS = (
    (0.05, 0.95, 0.18, 0.21),
    (0.10, 1.00, 0.46, 0.49),
    (0.00, 0.85, 0.74, 0.77),
)
_EXAMPLE3_CHANNELS = _EXAMPLE1_CHANNELS + (
    (0.00, 0.70, 0.08, 0.10),
    (0.30, 1.00, 0.31, 0.33),
    (0.00, 0.60, 0.60, 0.62),
    (0.40, 1.00, 0.88, 0.90),
    (0.55, 0.57, 0.33, 0.60),
    (0.20, 0.22, 0.62, 0.88),
)


def _to_cells(box: Tuple[float, float, float, float], fine_n: int) -> Tuple[int, int, int, int]:
    x0, x1, y0, y1 = (int(round(c * fine_n)) for c in box)
    return x0, max(x1, x0 + 1), y0, max(y1, y0 + 1)


def layout_spec(
    boxes: Sequence[Tuple[float, float, float, float]],
    fine_n: int,
    contrast: float = 1.0e4,
    background: float = 1.0,
    inclusions: int = 0,
    inclusion_size: int = 2,
) -> ChannelSpec:
    """ChannelSpec from unit-square boxes rasterized onto a fine_n grid."""
    return ChannelSpec(
        background=background,
        channel_value=background * contrast,
        rectangles=tuple(_to_cells(box, fine_n) for box in boxes),
        inclusions=inclusions,
        inclusion_size=inclusion_size,
    )


def example1_spec(fine_n: int, contrast: float = 1.0e4) -> ChannelSpec:
    """Three long channels with scattered inclusions."""
    return layout_spec(_EXAMPLE1_CHANNELS, fine_n, contrast, inclusions=fine_n // 5,
                       inclusion_size=max(1, fine_n // 50))


def example3_spec(fine_n: int, contrast: float = 1.0e4) -> ChannelSpec:
    """Denser channel network with vertical connectors."""
    return layout_spec(_EXAMPLE3_CHANNELS, fine_n, contrast, inclusions=fine_n // 3,
                       inclusion_size=max(1, fine_n // 50))


PRESETS = {"example1": example1_spec, "example3": example3_spec}


def synth_channel_field(grid: GridHierarchy, spec: ChannelSpec, seed: int = 0) -> PermeabilityField:
    """Rasterize a channel layout, then add seeded random inclusions.

    Args:
        grid: Grid whose fine cells receive values
        spec: Channel layout in fine cell indices
        seed: Seed for inclusion placement

    Returns:
        Two-valued PermeabilityField

    Raises:
        ValueError: If a rectangle leaves the grid or is empty
    """
    n = grid.fine_n
    values = np.full((n, n), spec.background)
    for k, (c0, c1, r0, r1) in enumerate(spec.rectangles):
        if not (0 <= c0 < c1 <= n and 0 <= r0 < r1 <= n):
            msg = f"channel rectangle {k} {(c0, c1, r0, r1)} is outside the {n}x{n} grid"
            logger.error(msg)
            raise ValueError(msg)
        values[r0:r1, c0:c1] = spec.channel_value

    if spec.inclusions:
        size = min(spec.inclusion_size, n)
        rng = np.random.default_rng(seed)
        corners = rng.integers(0, n - size + 1, size=(spec.inclusions, 2))
        for r0, c0 in corners:
            values[r0:r0 + size, c0:c0 + size] = spec.channel_value

    logger.debug(
        "Synthesized channel field",
        extra={"fine_n": n, "rectangles": len(spec.rectangles), "inclusions": spec.inclusions, "seed": seed},
    )
    return PermeabilityField(values)
