"""Argument checks for grid sizes, step sizes and input files.

Each check logs the failure before raising, and returns its input so it can
be used inline, e.g. ``dt = validate_positive(dt, "dt")``.
"""

from pathlib import Path
from typing import Any, List, Optional, Sequence, Type, Union

import numpy as np

from src.utils.logging import logger

Number = Union[int, float]


def _fail(msg: str, exc_type: Type[Exception] = ValueError) -> None:
    logger.error(msg)
    raise exc_type(msg)


def validate_positive(value: Number, name: str = "value", exc_type: Type[Exception] = ValueError) -> Number:
    """Reject zero, negative, NaN and infinite scalars."""
    if not np.isfinite(value) or value <= 0:
        _fail(f"{name} must be a finite positive number, got {value}", exc_type)
    return value


def validate_in_range(
    value: Number,
    min_value: Optional[Number] = None,
    max_value: Optional[Number] = None,
    name: str = "value",
    exc_type: Type[Exception] = ValueError,
) -> Number:
    """Closed interval check; a bound of None is open on that side."""
    if min_value is not None and value < min_value:
        _fail(f"{name} must be >= {min_value}, got {value}", exc_type)
    if max_value is not None and value > max_value:
        _fail(f"{name} must be <= {max_value}, got {value}", exc_type)
    return value


def validate_finite(values: Any, name: str = "array") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    bad = int(np.count_nonzero(~np.isfinite(arr)))
    if bad:
        _fail(f"{name} contains {bad} non-finite entries")
    return arr


def validate_path(
    path: Union[str, Path],
    should_exist: bool = True,
    should_be_file: bool = True,
    name: str = "path",
) -> Path:
    """Check an input path.

    With ``should_exist`` the path must be present and be a regular file
    (``should_be_file``) or a directory (otherwise). Without it only the
    conversion to Path happens, which suits output locations.
    """
    checked = Path(path)
    if not should_exist:
        return checked
    if not checked.exists():
        _fail(f"{name} does not exist: {checked}")
    if should_be_file and not checked.is_file():
        _fail(f"{name} is not a file: {checked}")
    if not should_be_file and not checked.is_dir():
        _fail(f"{name} is not a directory: {checked}")
    return checked


def validate_list_not_empty(values: Sequence[Any], name: str = "list") -> List[Any]:
    if len(values) == 0:
        _fail(f"{name} cannot be empty")
    return list(values)
