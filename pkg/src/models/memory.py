"""History storage and trajectory foot points for the direct memory solver."""

from dataclasses import dataclass, field
from typing import List

import numpy as np


@dataclass(frozen=True)
class FootPoint:
    """Upstream points x - (t - s) a~ and the mask of those outside the unit square."""

    points: np.ndarray = field(repr=False)
    outside: np.ndarray = field(repr=False)

    @property
    def any_outside(self) -> bool:
        return bool(np.any(self.outside))


@dataclass
class HistoryBuffer:
    """Fine nodal u at every past level 0..n, stored in full."""

    dt: float
    levels: List[np.ndarray] = field(default_factory=list)

    def append(self, u: np.ndarray) -> None:
        self.levels.append(np.array(u, dtype=float, copy=True))

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def n(self) -> int:
        """Index of the newest stored level."""
        return len(self.levels) - 1

    def time(self, k: int) -> float:
        return k * self.dt

    def latest(self) -> np.ndarray:
        return self.levels[-1]
