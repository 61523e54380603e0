"""Tests for validation, file, serialization and logging helpers."""

import json
import logging

import numpy as np
import pytest

from src.utils.errors import GridSizeError, MemsplitError, StabilityBoundError
from src.utils.file_utils import (
    ensure_directory,
    format_header,
    read_csv_rows,
    safe_read_file,
    safe_write_file,
    strip_comments,
    write_csv_rows,
)
from src.utils.logging import StructuredLogger
from src.utils.serialization_utils import config_hash, load_yaml, save_yaml, to_json
from src.utils.validation_utils import (
    validate_finite,
    validate_in_range,
    validate_list_not_empty,
    validate_path,
    validate_positive,
)


def test_validate_positive():
    assert validate_positive(2.5, "dt") == 2.5
    with pytest.raises(ValueError, match="dt must be a finite positive number"):
        validate_positive(0.0, "dt")
    with pytest.raises(ValueError):
        validate_positive(float("nan"), "dt")


def test_validate_positive_custom_exception():
    with pytest.raises(GridSizeError):
        validate_positive(-1, "coarse_n", GridSizeError)


def test_validate_in_range():
    assert validate_in_range(5, 0, 10, "m") == 5
    with pytest.raises(ValueError, match="m must be >= 0"):
        validate_in_range(-1, 0, 10, "m")
    with pytest.raises(ValueError, match="m must be <= 10"):
        validate_in_range(11, 0, 10, "m")
    assert validate_in_range(1e9, 0, None, "m") == 1e9


def test_validate_finite():
    arr = validate_finite([1, 2, 3], "u")
    assert arr.dtype == float
    with pytest.raises(ValueError, match="1 non-finite"):
        validate_finite([1.0, np.inf], "u")


def test_validate_path(tmp_path):
    path = tmp_path / "field.csv"
    with pytest.raises(ValueError, match="does not exist"):
        validate_path(path)
    path.write_text("1\n")
    assert validate_path(path) == path
    with pytest.raises(ValueError, match="is not a directory"):
        validate_path(path, should_be_file=False)
    assert validate_path(tmp_path / "new", should_exist=False) == tmp_path / "new"


def test_validate_list_not_empty():
    assert validate_list_not_empty((1, 2)) == [1, 2]
    with pytest.raises(ValueError, match="dts cannot be empty"):
        validate_list_not_empty([], "dts")


def test_error_hierarchy():
    error = StabilityBoundError("too large", 1e-3)
    assert isinstance(error, MemsplitError)
    assert isinstance(error, ValueError)
    assert error.bound == 1e-3


def test_write_and_read_csv_rows(tmp_path):
    rows = [{"n": 0, "t": 0.0, "err": None}, {"n": 1, "t": 0.1, "err": 1.0 / 3.0}]
    path = write_csv_rows(tmp_path / "out" / "trace.csv", rows, ["n", "t", "err"], metadata={"config_hash": "abc"})
    text = path.read_text()
    assert text.splitlines()[0] == "# config_hash=abc"
    assert "0.3333333333333333" in text
    back = read_csv_rows(path)
    assert back[0]["err"] == ""
    assert float(back[1]["err"]) == 1.0 / 3.0


def test_strip_comments_and_header():
    assert strip_comments("# c\n\n a = 1\n  # d\nb=2\n") == [" a = 1", "b=2"]
    assert format_header({"a": 1, "b": "x"}) == "# a=1; b=x\n"


def test_safe_file_roundtrip(tmp_path):
    path = tmp_path / "deep" / "dir" / "f.txt"
    safe_write_file(path, "hello")
    assert safe_read_file(path) == "hello"
    assert ensure_directory(tmp_path / "x" / "y").is_dir()
    with pytest.raises(FileNotFoundError):
        safe_read_file(tmp_path / "missing.txt")


def test_config_hash_is_order_independent():
    first = config_hash({"a": 1, "b": [1.0, 2.0]})
    second = config_hash({"b": [1.0, 2.0], "a": 1})
    assert first == second
    assert len(first) == 12
    assert config_hash({"a": 2, "b": [1.0, 2.0]}) != first


def test_numpy_values_serialize(tmp_path):
    data = {"gamma": np.float64(0.5), "dims": np.array([3, 4]), "path": tmp_path}
    assert json.loads(to_json(data))["dims"] == [3, 4]
    save_yaml(data, tmp_path / "c.yaml")
    loaded = load_yaml(tmp_path / "c.yaml")
    assert loaded["gamma"] == 0.5
    assert loaded["path"] == str(tmp_path)


def test_structured_logger_file_output(tmp_path):
    log = StructuredLogger("memsplit_test", log_dir=str(tmp_path), console_level="ERROR", file_level="DEBUG")
    log.debug("Element solved", extra={"element": 3, "residual": 1e-14})
    for handler in log.logger.handlers:
        handler.flush()
    files = list(tmp_path.glob("memsplit_test_*.log"))
    assert len(files) == 1
    record = json.loads(files[0].read_text().splitlines()[0])
    assert record["message"] == "Element solved"
    assert json.loads(record["extra"]) == {"element": 3, "residual": 1e-14}


def test_structured_logger_reconfigure(tmp_path):
    log = StructuredLogger("memsplit_reconf", console_level="WARNING")
    assert len(log.logger.handlers) == 1
    log.reconfigure(log_dir=str(tmp_path), console_level="INFO", file_level="WARNING")
    assert len(log.logger.handlers) == 2
    assert log.logger.level == logging.INFO
    log.reconfigure(console_level="ERROR")
    assert len(log.logger.handlers) == 1
