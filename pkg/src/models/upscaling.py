"""Layered media and their upscaled memory kernels."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np


@dataclass(frozen=True)
class LayeredMedium:
    """Stratified velocity field: layer widths m_i summing to 1 with velocities a_i.

    Construct through ``from_layers`` to merge equal velocities and sort.
    """

    widths: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        widths = np.asarray(self.widths, dtype=float)
        velocities = np.asarray(self.velocities, dtype=float)
        if widths.shape != velocities.shape or widths.ndim != 1 or widths.size == 0:
            raise ValueError("widths and velocities must be nonempty 1D arrays of equal length")
        if np.any(widths <= 0) or not np.all(np.isfinite(widths)):
            raise ValueError("layer widths must be finite and positive")
        if abs(widths.sum() - 1.0) > 1e-12:
            raise ValueError(f"layer widths must sum to 1, got {widths.sum()!r}")
        if not np.all(np.isfinite(velocities)) or np.any(np.diff(velocities) <= 0):
            raise ValueError("velocities must be finite and strictly increasing")
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "velocities", velocities)

    @classmethod
    def from_layers(cls, widths: Sequence[float], velocities: Sequence[float]) -> "LayeredMedium":
        """Sort by velocity and merge layers that share a velocity."""
        widths = np.asarray(widths, dtype=float)
        velocities = np.asarray(velocities, dtype=float)
        if widths.shape != velocities.shape:
            raise ValueError("widths and velocities must have equal length")
        unique, inverse = np.unique(velocities, return_inverse=True)
        merged = np.zeros(unique.size)
        np.add.at(merged, inverse, widths)
        return cls(merged, unique)

    @property
    def n(self) -> int:
        return self.widths.size

    @property
    def mean_velocity(self) -> float:
        return float(self.widths @ self.velocities)

    @property
    def variance(self) -> float:
        return float(self.widths @ (self.velocities - self.mean_velocity) ** 2)

    def to_dict(self) -> Dict:
        return {"widths": self.widths.tolist(), "velocities": self.velocities.tolist()}


@dataclass(frozen=True)
class UpscaledKernel:
    """Averaged velocity, interface nodes u_i and kernel weights beta_i with residuals."""

    mean_velocity: float
    velocities: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    variance: float
    node_residuals: np.ndarray = field(repr=False)
    weight_residual: float

    @property
    def interlaced(self) -> bool:
        """a_1 <= u_1 <= a_2 <= ... <= u_{n-1} <= a_n."""
        a = self.velocities
        return bool(np.all(a[:-1] <= self.nodes) and np.all(self.nodes <= a[1:]))

    @property
    def negative_weights(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.weights < 0)]

    @property
    def weight_sum_gap(self) -> float:
        return float(abs(self.weights.sum() - self.variance))

    def to_dict(self) -> Dict:
        return {
            "mean_velocity": self.mean_velocity,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "variance": self.variance,
            "node_residuals": self.node_residuals.tolist(),
            "weight_residual": self.weight_residual,
            "weight_sum_gap": self.weight_sum_gap,
        }
