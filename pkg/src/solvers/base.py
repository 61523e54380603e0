"""Base class shared by the time-stepping schemes."""

from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.models.state import CoupledState, SchemeConfig
from src.solvers.operators import AnsatzSpace, FineOperators, GalerkinOperators, galerkin, source_load
from src.utils.errors import SingularSystemError
from src.utils.logging import logger


def relative_residual(matrix: sp.spmatrix, solution: np.ndarray, rhs: np.ndarray) -> float:
    """||K x - b|| / (||b|| + ||K x||); zero when both sides vanish."""
    applied = matrix @ solution
    scale = np.linalg.norm(rhs) + np.linalg.norm(applied)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(applied - rhs) / scale)


def factorize(matrix: sp.spmatrix, label: str):
    """Sparse LU of a step operator, raising SingularSystemError on failure."""
    try:
        lu = splu(sp.csc_matrix(matrix))
    except RuntimeError as e:
        logger.error("Step operator is singular", extra={"operator": label, "error": str(e)})
        raise SingularSystemError(f"{label} step operator is singular: {e}") from e
    diagonal = lu.U.diagonal()
    if diagonal.size and (not np.all(np.isfinite(diagonal)) or np.min(np.abs(diagonal)) == 0.0):
        raise SingularSystemError(f"{label} step operator is singular")
    return lu


class TimeScheme(ABC):
    """A one-step scheme for the coupled u, v_1..v_M system on an ansatz space."""

    name = "scheme"

    def __init__(self, space: AnsatzSpace, operators: FineOperators, config: SchemeConfig):
        """Project the operators onto the space and prepare the step.

        Args:
            space: Ansatz space for u (and v)
            operators: Fine mass, stiffness and convection operators
            config: Step size, kernel and source of the run
        """
        self.space = space
        self.operators = operators
        self.config = config
        self.dt = config.dt
        self.galerkin: GalerkinOperators = galerkin(space, operators)
        self.load = source_load(space, operators, config.source)
        self.last_residual: Optional[float] = None
        self._prepare()

    @abstractmethod
    def _prepare(self) -> None:
        """Assemble and factorize whatever stays fixed over the run."""
        pass

    @abstractmethod
    def step(self, state: CoupledState) -> CoupledState:
        """Advance one time level.

        Args:
            state: Current state

        Returns:
            State at level n + 1
        """
        pass

    def energy(self, state: CoupledState) -> Tuple[float, float]:
        return energy(state, self.galerkin, self.space.dim_v1)

    def check_state(self, state: CoupledState) -> None:
        if state.M != self.galerkin.M:
            raise ValueError(f"state has {state.M} auxiliary variables, kernel has {self.galerkin.M}")
        if state.u.shape != (self.space.dim_u,):
            raise ValueError(f"u has {state.u.size} coefficients, space has {self.space.dim_u}")
        for v in state.v:
            if v.shape != (self.space.dim_v,):
                raise ValueError(f"v has {v.size} coefficients, space has {self.space.dim_v}")


def energy(state: CoupledState, ops: GalerkinOperators, dim_v1: Optional[int] = None) -> Tuple[float, float]:
    """E = u^T M u + sum v_i^T A_i v_i and the split energy with separate V_H^1, V_H^2 blocks.

    Without a split the two coincide.
    """
    base = float(state.u @ (ops.mass_uu @ state.u))
    full = base + sum(float(v @ (a @ v)) for v, a in zip(state.v, ops.stiffness_vv))
    if dim_v1 is None:
        return full, full
    split = base
    for v, a in zip(state.v, ops.stiffness_vv):
        v1, v2 = v[:dim_v1], v[dim_v1:]
        split += float(v1 @ (a[:dim_v1, :dim_v1] @ v1)) + float(v2 @ (a[dim_v1:, dim_v1:] @ v2))
    return full, split
