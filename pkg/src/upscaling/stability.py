"""Cellwise check of beta kappa_11 + a~ . grad kappa_11 >= 0."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from src.models.fields import PermeabilityField
from src.utils.logging import logger
from src.utils.validation_utils import validate_positive


@dataclass(frozen=True)
class StabilityReport:
    values: np.ndarray = field(repr=False)
    beta: float
    velocity_tilde: Tuple[float, float]

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def violations(self) -> List[Tuple[int, int]]:
        """(row, col) of every cell where the condition fails."""
        rows, cols = np.nonzero(self.values < 0)
        return list(zip(rows.tolist(), cols.tolist()))

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict:
        return {
            "beta": self.beta,
            "velocity_tilde": list(self.velocity_tilde),
            "min_value": self.min_value,
            "violations": len(self.violations),
            "satisfied": self.satisfied,
        }


def _cell_gradient(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Forward differences, backward in the last cell."""
    grad = np.empty_like(values)
    forward = np.diff(values, axis=axis) / h
    if axis == 1:
        grad[:, :-1] = forward
        grad[:, -1] = forward[:, -1] if values.shape[1] > 1 else 0.0
    else:
        grad[:-1, :] = forward
        grad[-1, :] = forward[-1, :] if values.shape[0] > 1 else 0.0
    return grad


def check_continuous_stability(
    kappa11: Union[PermeabilityField, np.ndarray],
    velocity_tilde: Sequence[float],
    beta: float,
) -> StabilityReport:
    """Evaluate beta kappa_11 + a~ . grad kappa_11 on every fine cell.

    The result is a diagnostic; runs are never blocked by it.
    """
    validate_positive(beta, "beta")
    values = kappa11.values if isinstance(kappa11, PermeabilityField) else np.asarray(kappa11, dtype=float)
    h = 1.0 / values.shape[1]
    a1, a2 = (float(c) for c in velocity_tilde)
    # rows run along x2
    drift = a1 * _cell_gradient(values, h, axis=1) + a2 * _cell_gradient(values, h, axis=0)
    report = StabilityReport(values=beta * values + drift, beta=float(beta), velocity_tilde=(a1, a2))
    level = logger.info if report.satisfied else logger.warning
    level("Memory stability condition", extra=report.to_dict())
    return report
