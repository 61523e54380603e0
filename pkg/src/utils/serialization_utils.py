"""JSON and YAML forms of configs and summaries, and the config hash stamped on outputs."""

import hashlib
import json
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel

from src.utils.file_utils import safe_read_file, safe_write_file
from src.utils.logging import logger


class NumericEncoder(json.JSONEncoder):
    """Numpy scalars become Python numbers, arrays become lists, paths become strings."""

    def default(self, obj: Any) -> Any:
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Path):
            return str(obj)
        return super().default(obj)


def _plain(data: Any) -> Any:
    if isinstance(data, BaseModel):
        return data.model_dump(mode="json")
    return data


def to_json(data: Any, indent: Optional[int] = 2, sort_keys: bool = True) -> str:
    try:
        return json.dumps(_plain(data), indent=indent, sort_keys=sort_keys, cls=NumericEncoder)
    except TypeError as e:
        logger.error("Value has no JSON form", extra={"error": str(e), "type": type(data).__name__})
        raise


def config_hash(data: Any, length: int = 12) -> str:
    """Hash a config as SHA-256 of its canonical JSON form."""
    canonical = json.dumps(
        _plain(data), sort_keys=True, separators=(",", ":"), cls=NumericEncoder
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:length]


def to_yaml(data: Any, sort_keys: bool = True) -> str:
    """Block-style YAML of ``data`` after the JSON conversion above."""
    try:
        plain = json.loads(to_json(data))
        return yaml.safe_dump(plain, default_flow_style=False, sort_keys=sort_keys, allow_unicode=True)
    except yaml.YAMLError as e:
        logger.error("Cannot render YAML", extra={"error": str(e)})
        raise


def save_yaml(data: Any, path: Union[str, Path], sort_keys: bool = True) -> None:
    safe_write_file(path, to_yaml(data, sort_keys))


def load_yaml(path: Union[str, Path]) -> Any:
    """Parsed YAML; missing files raise FileNotFoundError from safe_read_file."""
    try:
        return yaml.safe_load(safe_read_file(path))
    except yaml.YAMLError as e:
        logger.error("Malformed YAML", extra={"path": str(path), "error": str(e)})
        raise
