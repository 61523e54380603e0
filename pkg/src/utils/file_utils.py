"""Reading and writing of the text outputs: grids, traces, kernels and configs.

Every output is plain UTF-8 text with '\n' line endings so that two runs of the
same configuration produce byte-identical files.
"""

import csv
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from src.utils.logging import logger

PathLike = Union[str, Path]


def ensure_directory(path: PathLike) -> Path:
    """Create ``path`` and its parents if missing; OSError is logged and re-raised."""
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error("Cannot create output directory", extra={"path": str(directory), "error": str(e)})
        raise
    return directory


def safe_read_file(path: PathLike) -> str:
    """Whole contents of a text input (field, medium or config file)."""
    source = Path(path)
    try:
        return source.read_text(encoding="utf-8")
    except FileNotFoundError:
        logger.error("Input file missing", extra={"path": str(source)})
        raise
    except OSError as e:
        logger.error("Cannot read input file", extra={"path": str(source), "error": str(e)})
        raise


def safe_write_file(path: PathLike, content: str) -> None:
    """Write ``content`` to ``path``, creating the parent directory first."""
    target = Path(path)
    ensure_directory(target.parent)
    try:
        with target.open("w", encoding="utf-8", newline="") as handle:
            handle.write(content)
    except OSError as e:
        logger.error("Cannot write output file", extra={"path": str(target), "error": str(e)})
        raise


def strip_comments(text: str) -> List[str]:
    """Return the non-empty lines of a file that are not '#' comments."""
    return [
        line for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]


def format_header(metadata: Dict[str, Any]) -> str:
    """Render run metadata as a single '#' comment line."""
    parts = [f"{key}={value}" for key, value in metadata.items()]
    return "# " + "; ".join(parts) + "\n"


def write_csv_rows(
    path: PathLike,
    rows: Iterable[Dict[str, Any]],
    fieldnames: Sequence[str],
    metadata: Optional[Dict[str, Any]] = None
) -> Path:
    """Write dict rows as CSV, preceded by an optional metadata comment line.

    Floats are written with repr precision so that reruns are byte-identical.

    Returns:
        The path written
    """
    buffer = io.StringIO()
    if metadata:
        buffer.write(format_header(metadata))
    writer = csv.DictWriter(buffer, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _format_cell(row.get(key)) for key in fieldnames})
    safe_write_file(path, buffer.getvalue())
    return Path(path)


def read_csv_rows(path: PathLike) -> List[Dict[str, str]]:
    """Read a CSV written by write_csv_rows, skipping comment lines."""
    body = strip_comments(safe_read_file(path))
    return list(csv.DictReader(body))


def _format_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return value
