"""Semi-implicit scheme: diffusion and memory implicit, convection explicit."""

import numpy as np
import scipy.sparse as sp

from src.models.state import CoupledState
from src.solvers.base import TimeScheme, factorize, relative_residual
from src.utils.logging import logger


class ImplicitScheme(TimeScheme):
    """Monolithic solve for (v_1, ..., v_M, u) with one factorization per run.

    v_i rows:  (M/dt) v_i' - M u' = (M/dt) v_i - beta_i M v_i - C_at v_i
    u row:     sum_i A_i v_i' + (M/dt) u' = (M/dt) u - C_a u + g
    """

    name = "implicit"

    def _prepare(self) -> None:
        ops, dt = self.galerkin, self.dt
        M = ops.M
        blocks = [[None] * (M + 1) for _ in range(M + 1)]
        for i in range(M):
            blocks[i][i] = ops.mass_vv / dt
            blocks[i][M] = -ops.mass_vu
            blocks[M][i] = ops.stiffness_uv[i]
        blocks[M][M] = ops.mass_uu / dt
        self.matrix = sp.bmat(blocks, format="csc")
        self.lu = factorize(self.matrix, self.name)
        logger.debug("Implicit step operator factorized", extra={"dim": self.matrix.shape[0], "M": M})

    def rhs(self, state: CoupledState) -> np.ndarray:
        ops, dt = self.galerkin, self.dt
        parts = []
        for v, beta in zip(state.v, ops.betas):
            mv = ops.mass_vv @ v
            parts.append(mv / dt - beta * mv - ops.convection_vv @ v)
        parts.append(ops.mass_uu @ state.u / dt - ops.convection_uu @ state.u + self.load)
        return np.concatenate(parts)

    def step(self, state: CoupledState) -> CoupledState:
        self.check_state(state)
        rhs = self.rhs(state)
        solution = self.lu.solve(rhs)
        self.last_residual = relative_residual(self.matrix, solution, rhs)
        n_v = self.space.dim_v
        v = tuple(solution[i * n_v:(i + 1) * n_v] for i in range(state.M))
        return CoupledState(n=state.n + 1, t=state.t + self.dt, u=solution[state.M * n_v:], v=v)


def step_implicit(state: CoupledState, scheme: ImplicitScheme) -> CoupledState:
    return scheme.step(state)
