"""Layered media and upscaled kernels as CSV."""

from pathlib import Path
from typing import Any, Dict, Optional, Union

from src.models.upscaling import LayeredMedium, UpscaledKernel
from src.utils.errors import FieldFormatError
from src.utils.file_utils import safe_read_file, strip_comments, write_csv_rows

KERNEL_FIELDS = ["i", "a", "u", "beta", "node_residual"]


def load_medium(path: Union[str, Path]) -> LayeredMedium:
    """Two columns m, a per layer; an optional header line and '#' comments are skipped."""
    lines = strip_comments(safe_read_file(path))
    widths, velocities = [], []
    for number, line in enumerate(lines):
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != 2:
            raise FieldFormatError(f"{path}: line {number + 1} has {len(cells)} columns, expected 2")
        try:
            m, a = float(cells[0]), float(cells[1])
        except ValueError:
            if number == 0:
                continue
            raise FieldFormatError(f"{path}: malformed number on line {number + 1}: {line!r}")
        widths.append(m)
        velocities.append(a)
    if not widths:
        raise FieldFormatError(f"{path}: no layers")
    try:
        return LayeredMedium.from_layers(widths, velocities)
    except ValueError as e:
        raise FieldFormatError(f"{path}: {e}") from e


def save_medium(medium: LayeredMedium, path: Union[str, Path]) -> Path:
    rows = [{"m": float(m), "a": float(a)} for m, a in zip(medium.widths, medium.velocities)]
    return write_csv_rows(path, rows, ["m", "a"])


def save_kernel(
    kernel: UpscaledKernel,
    path: Union[str, Path],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """One row per layer velocity; node columns are empty on the last row."""
    header = {
        "a_bar": kernel.mean_velocity,
        "variance": kernel.variance,
        "weight_residual": kernel.weight_residual,
        "weight_sum_gap": kernel.weight_sum_gap,
        **(metadata or {}),
    }
    rows = []
    for i, a in enumerate(kernel.velocities):
        row = {"i": i + 1, "a": float(a)}
        if i < kernel.nodes.size:
            row.update({
                "u": float(kernel.nodes[i]),
                "beta": float(kernel.weights[i]),
                "node_residual": float(kernel.node_residuals[i]),
            })
        rows.append(row)
    return write_csv_rows(path, rows, KERNEL_FIELDS, metadata=header)
