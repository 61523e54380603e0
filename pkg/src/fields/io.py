"""Reading and writing cellwise fields in the CSV grid format.

The format is a first line ``rows cols`` followed by ``rows`` lines of
``cols`` comma-separated decimal values. Lines starting with ``#`` are
comments and may carry run metadata.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.models.fields import PermeabilityField
from src.utils.errors import FieldFormatError
from src.utils.file_utils import format_header, safe_read_file, safe_write_file, strip_comments
from src.utils.logging import logger
from src.utils.validation_utils import validate_path


def _split(line: str) -> List[str]:
    return line.replace(",", " ").split()


def _parse_blocks(lines: List[str], path: Path) -> List[np.ndarray]:
    blocks = []
    pos = 0
    while pos < len(lines):
        header = _split(lines[pos])
        if len(header) != 2:
            raise FieldFormatError(f"{path}: line '{lines[pos]}' is not a 'rows cols' header")
        try:
            rows, cols = int(header[0]), int(header[1])
        except ValueError:
            raise FieldFormatError(f"{path}: malformed header '{lines[pos]}'")
        if rows <= 0 or cols <= 0:
            raise FieldFormatError(f"{path}: header dimensions must be positive, got {rows}x{cols}")
        body = lines[pos + 1:pos + 1 + rows]
        if len(body) != rows:
            raise FieldFormatError(f"{path}: header declares {rows} rows, found {len(body)}")
        values = np.empty((rows, cols))
        for r, line in enumerate(body):
            tokens = _split(line)
            if len(tokens) != cols:
                raise FieldFormatError(
                    f"{path}: row {r} has {len(tokens)} values, header declares {cols}"
                )
            for c, token in enumerate(tokens):
                try:
                    values[r, c] = float(token)
                except ValueError:
                    raise FieldFormatError(f"{path}: malformed number '{token}' at (row={r}, col={c})")
        blocks.append(values)
        pos += 1 + rows
    return blocks


def load_grids(path: Union[str, Path]) -> List[np.ndarray]:
    """Read every 'rows cols' block of a grid file."""
    path = validate_path(path, name="field file")
    lines = strip_comments(safe_read_file(path))
    if not lines:
        raise FieldFormatError(f"{path}: file holds no grid")
    return _parse_blocks(lines, path)


def load_grid(path: Union[str, Path]) -> np.ndarray:
    """Read a single grid of arbitrary finite values."""
    blocks = load_grids(path)
    if len(blocks) != 1:
        raise FieldFormatError(f"{path}: expected one grid, found {len(blocks)}")
    return blocks[0]


def load_field(path: Union[str, Path]) -> PermeabilityField:
    """Load a positive permeability field.

    Raises:
        FieldFormatError: On dimension mismatch, malformed numbers or nonpositive cells
    """
    values = load_grid(path)
    if not np.all(np.isfinite(values)):
        row, col = (int(k) for k in np.argwhere(~np.isfinite(values))[0])
        raise FieldFormatError(f"{path}: non-finite value at (row={row}, col={col})")
    try:
        field = PermeabilityField(values)
    except ValueError as e:
        logger.error("Rejected field file", extra={"path": str(path), "error": str(e)})
        raise FieldFormatError(f"{path}: {e}") from e
    logger.debug("Loaded field", extra={"path": str(path), "shape": field.shape})
    return field


def format_grid(values: np.ndarray) -> str:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    lines = [f"{values.shape[0]} {values.shape[1]}"]
    lines.extend(",".join(repr(float(v)) for v in row) for row in values)
    return "\n".join(lines) + "\n"


def save_grids(
    blocks: List[np.ndarray],
    path: Union[str, Path],
    metadata: Optional[Dict[str, Any]] = None,
    block_comments: Optional[List[str]] = None,
) -> Path:
    """Write several grids to one file, each optionally preceded by a comment line."""
    parts = [format_header(metadata)] if metadata else []
    for k, block in enumerate(blocks):
        if block_comments is not None:
            parts.append(f"# {block_comments[k]}\n")
        parts.append(format_grid(block))
    safe_write_file(path, "".join(parts))
    return Path(path)


def save_grid(
    values: np.ndarray,
    path: Union[str, Path],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    return save_grids([values], path, metadata)


def save_field(
    field: PermeabilityField,
    path: Union[str, Path],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write a field so that ``load_field`` returns identical values."""
    return save_grid(field.values, path, metadata)
