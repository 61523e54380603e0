"""Configuration management for memsplit experiments."""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.utils.file_utils import safe_read_file, strip_comments
from src.utils.logging import DEFAULT_CONSOLE_LEVEL
from src.utils.serialization_utils import config_hash

SCHEME_RUNS = ("reference", "implicit_v1", "implicit_vh", "partially_explicit")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ExperimentConfig(BaseModel):
    """Problem, discretization and run settings; defaults reproduce the first example."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    coarse_n: int = Field(default=10, ge=2)
    refine: int = Field(default=10, ge=1)
    field_file: Optional[Path] = None
    field_preset: Literal["example1", "example3"] = "example1"
    contrast: float = Field(default=1.0e4, gt=0)
    seed: int = 0
    velocity: Tuple[float, float] = (0.1, 0.0)
    velocity_tilde: Tuple[float, float] = (0.05, 0.0)
    beta: float = Field(default=1.0, gt=0)
    dt: float = Field(default=5.0e-4, gt=0)
    T: float = Field(default=0.05, ge=0)
    n_aux: int = Field(default=3, ge=1)
    n_explicit: int = Field(default=3, ge=0)
    oversampling: int = Field(default=4, ge=0)
    weight_choice: Literal["kappa_grad_chi", "kappa_h2"] = "kappa_grad_chi"
    u0: Literal["product_sine", "zero"] = "product_sine"
    source: Literal["none", "product_sine"] = "none"
    bc_u: Literal["dirichlet", "neumann", "inflow"] = "neumann"
    bc_v: Literal["dirichlet", "neumann", "inflow"] = "neumann"
    schemes: List[str] = Field(default_factory=lambda: list(SCHEME_RUNS))
    scheme: Literal["implicit", "partially_explicit"] = "implicit"
    space: Literal["fine", "v1", "vh"] = "vh"
    augment_inflow: bool = False
    allow_unstable_dt: bool = False
    snapshot_stride: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)

    @field_validator("velocity", "velocity_tilde", "schemes", mode="before")
    @classmethod
    def _split(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("schemes")
    @classmethod
    def _known_schemes(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in SCHEME_RUNS]
        if unknown:
            raise ValueError(f"unknown scheme runs {unknown}; expected a subset of {list(SCHEME_RUNS)}")
        return value

    @model_validator(mode="after")
    def _whole_steps(self) -> "ExperimentConfig":
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"T = {self.T} is not a whole number of steps of dt = {self.dt}")
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def fine_n(self) -> int:
        return self.coarse_n * self.refine


class OutputConfig(BaseModel):
    """Where run bundles are written."""

    model_config = ConfigDict(extra="forbid")

    output_dir: Path = Field(default_factory=lambda: Path(os.getenv("MEMSPLIT_OUTPUT_DIR", "output")))
    write_snapshots: bool = True


class LoggingConfig(BaseModel):
    """Console and file log levels; no file handler without a directory."""

    model_config = ConfigDict(extra="forbid")

    level: str = Field(default_factory=lambda: os.getenv("MEMSPLIT_LOG_LEVEL", DEFAULT_CONSOLE_LEVEL))
    file_level: str = Field(default_factory=lambda: os.getenv("MEMSPLIT_LOG_FILE_LEVEL", "DEBUG"))
    log_dir: Optional[Path] = Field(default_factory=lambda: Path(d) if (d := os.getenv("MEMSPLIT_LOG_DIR")) else None)


EXAMPLE_PRESETS: Dict[int, Dict[str, Any]] = {
    1: {"field_preset": "example1", "u0": "product_sine", "source": "none"},
    2: {"field_preset": "example1", "u0": "zero", "source": "product_sine"},
    3: {"field_preset": "example3", "u0": "zero", "source": "product_sine"},
}

_SECTIONS = {
    "experiment": set(ExperimentConfig.model_fields),
    "output": set(OutputConfig.model_fields),
    "logging": set(LoggingConfig.model_fields),
}


def parse_key_values(text: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment line.

    Raises:
        ValueError: On a line without '=' or a repeated key
    """
    values: Dict[str, str] = {}
    for number, line in enumerate(strip_comments(text), start=1):
        if "=" not in line:
            raise ValueError(f"config line {number} is not 'key = value': {line.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ValueError(f"config key {key!r} given twice")
        values[key] = value
    return values


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a YAML (``.yaml``/``.yml``) or key = value config file into flat settings."""
    path = Path(path)
    text = safe_read_file(path)
    if path.suffix in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"error parsing configuration file {path}: {e}") from e
        if not isinstance(data, dict):
            raise ValueError(f"configuration file {path} must hold a mapping")
        flat: Dict[str, Any] = {}
        for key, value in data.items():
            if key in _SECTIONS and isinstance(value, dict):
                flat.update(value)
            else:
                flat[key] = value
        return flat
    return parse_key_values(text)


def _route(settings: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    routed: Dict[str, Dict[str, Any]] = {name: {} for name in _SECTIONS}
    for key, value in settings.items():
        section = next((name for name, keys in _SECTIONS.items() if key in keys), None)
        if section is None:
            raise ValueError(f"unknown config key {key!r}")
        routed[section][key] = value
    return routed


@dataclass
class Config:
    """Experiment, output and logging sections resolved from all sources."""

    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    @classmethod
    def resolve(
        cls,
        config_file: Optional[Union[str, Path]] = None,
        overrides: Optional[Dict[str, Any]] = None,
        example: Optional[int] = None,
    ) -> "Config":
        """Merge defaults < example preset < config file < overrides.

        Args:
            config_file: Optional key = value or YAML file
            overrides: Settings given on the command line; None values are skipped
            example: Example preset id (1, 2 or 3)

        Raises:
            ValueError: On unknown keys, bad values or an unknown example
        """
        settings: Dict[str, Any] = {}
        if example is not None:
            if example not in EXAMPLE_PRESETS:
                raise ValueError(f"unknown example {example}; expected one of {sorted(EXAMPLE_PRESETS)}")
            settings.update(EXAMPLE_PRESETS[example])
        if config_file:
            settings.update(load_config_file(config_file))
        settings.update({key: value for key, value in (overrides or {}).items() if value is not None})
        routed = _route(settings)
        return cls(
            experiment=ExperimentConfig(**routed["experiment"]),
            output=OutputConfig(**routed["output"]),
            logging=LoggingConfig(**routed["logging"]),
        )

    def get_config_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment.model_dump(mode="json"),
            "output": self.output.model_dump(mode="json"),
            "logging": self.logging.model_dump(mode="json"),
        }

    @property
    def hash(self) -> str:
        """Short hash of the experiment section, stamped into every output header."""
        return config_hash(self.experiment.model_dump(mode="json"))
