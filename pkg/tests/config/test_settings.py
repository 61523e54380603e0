"""Tests for config files, example presets, precedence and hashing."""

import logging
from pathlib import Path

import pytest
from pydantic import ValidationError

from src.config.settings import Config, ExperimentConfig, LoggingConfig, load_config_file, parse_key_values
from src.utils.logging import DEFAULT_CONSOLE_LEVEL, StructuredLogger


def test_defaults_match_first_example():
    settings = ExperimentConfig()
    assert (settings.coarse_n, settings.refine, settings.fine_n) == (10, 10, 100)
    assert settings.velocity == (0.1, 0.0)
    assert settings.velocity_tilde == (0.05, 0.0)
    assert (settings.T, settings.dt, settings.n_steps) == (0.05, 5.0e-4, 100)
    assert (settings.n_aux, settings.n_explicit, settings.oversampling) == (3, 3, 4)
    assert settings.schemes == ["reference", "implicit_v1", "implicit_vh", "partially_explicit"]
    assert (settings.bc_u, settings.bc_v) == ("neumann", "neumann")


def test_parse_key_values():
    text = "# comment\ncoarse_n = 5\n  dt=1e-3 \nvelocity = 0.1, 0\n"
    assert parse_key_values(text) == {"coarse_n": "5", "dt": "1e-3", "velocity": "0.1, 0"}


@pytest.mark.parametrize("text, message", [
    ("coarse_n 5\n", "line 1"),
    ("dt = 1\ndt = 2\n", "given twice"),
])
def test_parse_key_values_errors(text, message):
    with pytest.raises(ValueError, match=message):
        parse_key_values(text)


def test_string_values_are_coerced(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("coarse_n = 5\nrefine = 4\nvelocity = 0.2, 0.1\nschemes = reference, implicit_vh\n"
                    "allow_unstable_dt = true\ndt = 1e-3\nT = 0.01\n")
    config = Config.resolve(path)
    assert config.experiment.coarse_n == 5
    assert config.experiment.velocity == (0.2, 0.1)
    assert config.experiment.schemes == ["reference", "implicit_vh"]
    assert config.experiment.allow_unstable_dt is True
    assert config.experiment.n_steps == 10


def test_yaml_sections_are_flattened(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("experiment:\n  coarse_n: 4\n  beta: 2.0\noutput:\n  write_snapshots: false\nseed: 7\n")
    flat = load_config_file(path)
    assert flat == {"coarse_n": 4, "beta": 2.0, "write_snapshots": False, "seed": 7}
    config = Config.resolve(path)
    assert config.experiment.beta == 2.0
    assert config.output.write_snapshots is False


def test_precedence_defaults_preset_file_flags(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("u0 = product_sine\ncoarse_n = 6\n")
    config = Config.resolve(path, {"coarse_n": "7", "seed": None}, example=2)
    assert config.experiment.source == "product_sine"  # preset
    assert config.experiment.u0 == "product_sine"  # file over preset
    assert config.experiment.coarse_n == 7  # flag over file
    assert config.experiment.seed == 0  # None flags are skipped


def test_example_three_uses_more_channels():
    assert Config.resolve(example=3).experiment.field_preset == "example3"
    with pytest.raises(ValueError, match="unknown example"):
        Config.resolve(example=4)


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("coarse_nn = 5\n")
    with pytest.raises(ValueError, match="unknown config key 'coarse_nn'"):
        Config.resolve(path)


def test_partial_steps_rejected():
    with pytest.raises(ValidationError, match="whole number of steps"):
        ExperimentConfig(dt=3e-3, T=0.01)


def test_unknown_scheme_run_rejected():
    with pytest.raises(ValidationError, match="unknown scheme runs"):
        ExperimentConfig(schemes="reference,explicit")


def test_hash_tracks_experiment_only(tmp_path):
    base = Config.resolve()
    assert base.hash == Config.resolve().hash
    assert Config.resolve(overrides={"seed": 1}).hash != base.hash
    assert Config.resolve(overrides={"output_dir": str(tmp_path)}).hash == base.hash


def test_environment_sets_output_dir(monkeypatch, tmp_path):
    monkeypatch.setenv("MEMSPLIT_OUTPUT_DIR", str(tmp_path))
    assert Config.resolve().output.output_dir == Path(tmp_path)


def test_config_dict_is_plain():
    data = Config.resolve().get_config_dict()
    assert set(data) == {"experiment", "output", "logging"}
    assert data["experiment"]["velocity"] == [0.1, 0.0]


def test_logging_defaults_agree(monkeypatch):
    """The package logger and LoggingConfig share one console level when the environment is silent."""
    monkeypatch.delenv("MEMSPLIT_LOG_LEVEL", raising=False)
    assert LoggingConfig().level == DEFAULT_CONSOLE_LEVEL == "INFO"
    assert StructuredLogger("memsplit_defaults").console_level == logging.INFO
