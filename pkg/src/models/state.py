"""Time-stepping state, energy trace and scheme configuration."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.models.fields import KernelSpec
from src.models.grid import BoundaryCondition
from src.utils.validation_utils import validate_in_range, validate_positive

SCHEMES = ("implicit", "partially_explicit")
SPACES = ("fine", "v1", "vh")


@dataclass(frozen=True)
class CoupledState:
    """Coefficients of u and v_1..v_M at one time level.

    For the partially explicit scheme the coordinates are ordered with the
    V_H^1 block first, so ``split(dim_v1)`` yields (u1, u2) and (v1, v2).
    """

    n: int
    t: float
    u: np.ndarray = field(repr=False)
    v: Tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        for name, vec in [("u", self.u)] + [(f"v{i + 1}", w) for i, w in enumerate(self.v)]:
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"state component {name} is not finite at step {self.n}")
        object.__setattr__(self, "v", tuple(self.v))

    @property
    def M(self) -> int:
        return len(self.v)

    def split(self, dim_v1: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return (u1, u2, v1, v2) for a single auxiliary variable."""
        v = self.v[0]
        return self.u[:dim_v1], self.u[dim_v1:], v[:dim_v1], v[dim_v1:]


@dataclass
class EnergyTrace:
    """Per-step energies, errors and step residuals of a run."""

    rows: List[Dict] = field(default_factory=list)

    def record(
        self,
        n: int,
        t: float,
        energy: float,
        energy_split: float,
        rel_l2_err: Optional[float] = None,
        residual: Optional[float] = None,
        energy_continuous: Optional[float] = None,
    ) -> None:
        if energy < 0 or energy_split < 0:
            raise ValueError(f"negative energy at step {n}: E={energy}, E_tilde={energy_split}")
        self.rows.append({
            "n": n,
            "t": t,
            "E": energy,
            "E_tilde": energy_split,
            "rel_l2_err": rel_l2_err,
            "residual": residual,
            "E_continuous": energy_continuous,
        })

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, key: str) -> np.ndarray:
        return np.array([np.nan if row[key] is None else row[key] for row in self.rows], dtype=float)

    @property
    def energies(self) -> np.ndarray:
        return self.column("E")

    @property
    def split_energies(self) -> np.ndarray:
        return self.column("E_tilde")

    @property
    def errors(self) -> np.ndarray:
        return self.column("rel_l2_err")

    @property
    def max_residual(self) -> float:
        residuals = [row["residual"] for row in self.rows if row["residual"] is not None]
        return max(residuals) if residuals else 0.0

    def is_nonincreasing(self, key: str = "E", rtol: float = 1e-12) -> bool:
        values = self.column(key)
        return bool(np.all(values[1:] <= values[:-1] * (1.0 + rtol) + 1e-300))


@dataclass(frozen=True)
class SchemeConfig:
    """Parameters of one time-stepping run."""

    scheme: str
    dt: float
    n_steps: int
    kernel: KernelSpec
    velocity: Tuple[float, float] = (0.0, 0.0)
    velocity_tilde: Tuple[float, float] = (0.0, 0.0)
    source: Optional[np.ndarray] = field(default=None, repr=False)
    bc: BoundaryCondition = field(default_factory=BoundaryCondition)
    space: str = "fine"
    allow_unstable_dt: bool = False
    snapshot_stride: int = 0
    augment_inflow: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.space not in SPACES:
            raise ValueError(f"unknown space {self.space!r}; expected one of {SPACES}")
        validate_positive(self.dt, "dt")
        validate_in_range(self.n_steps, 0, None, "n_steps")
        validate_in_range(self.snapshot_stride, 0, None, "snapshot_stride")
        if not np.all(np.isfinite(tuple(self.velocity) + tuple(self.velocity_tilde))):
            raise ValueError("velocities must be finite")
        if self.scheme == "partially_explicit" and self.kernel.M != 1:
            raise ValueError(f"partially explicit scheme needs M = 1, got M = {self.kernel.M}")
        object.__setattr__(self, "velocity", tuple(float(c) for c in self.velocity))
        object.__setattr__(self, "velocity_tilde", tuple(float(c) for c in self.velocity_tilde))

    @property
    def T(self) -> float:
        return self.dt * self.n_steps

    def to_dict(self) -> Dict:
        return {
            "scheme": self.scheme,
            "dt": self.dt,
            "n_steps": self.n_steps,
            "M": self.kernel.M,
            "betas": self.kernel.betas,
            "velocity": list(self.velocity),
            "velocity_tilde": list(self.velocity_tilde),
            "has_source": self.source is not None,
            "bc": self.bc.to_dict(),
            "space": self.space,
            "allow_unstable_dt": self.allow_unstable_dt,
        }
