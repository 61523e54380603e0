"""Partially explicit splitting scheme on V_H = V_H^1 + V_H^2 for a single memory term.

The V_H^2 part of v is advanced explicitly first; then one coupled solve
gives the V_H^1 part of v and both parts of u.
"""

from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve

from src.models.spaces import SchemeConstants
from src.models.state import CoupledState, SchemeConfig
from src.solvers.base import TimeScheme, factorize, relative_residual
from src.utils.errors import SingularSystemError, StabilityBoundError
from src.utils.logging import logger


def check_step_bound(config: SchemeConfig, constants: Optional[SchemeConstants]) -> None:
    """Reject dt above beta (1 - gamma) / lambda_max unless the run allows it."""
    if constants is None:
        return
    if config.dt <= constants.dt_bound:
        return
    context = {"dt": config.dt, "dt_bound": constants.dt_bound, "gamma": constants.gamma}
    if config.allow_unstable_dt:
        logger.warning("Step exceeds the stability bound of the split scheme", extra=context)
        return
    logger.error("Step exceeds the stability bound of the split scheme", extra=context)
    raise StabilityBoundError(
        f"dt = {config.dt!r} exceeds the stability bound {constants.dt_bound!r}", constants.dt_bound
    )


class PartiallyExplicitScheme(TimeScheme):
    """Split scheme for M = 1 with the V_H^1 block first in every coefficient vector."""

    name = "partially_explicit"

    def _prepare(self) -> None:
        if not self.space.is_split:
            raise ValueError("partially explicit scheme needs a V_H^1 + V_H^2 space with W = V")
        if self.galerkin.M != 1:
            raise ValueError(f"partially explicit scheme needs M = 1, got M = {self.galerkin.M}")
        ops, dt = self.galerkin, self.dt
        n1 = self.space.dim_v1
        self.n1, self.n2 = n1, self.space.dim_u - n1
        G, A, C = ops.mass_uu, ops.stiffness_uv[0], ops.convection_vv
        self.beta = ops.betas[0]
        self.G11, self.G12 = G[:n1, :n1], G[:n1, n1:]
        self.G21, self.G22 = G[n1:, :n1], G[n1:, n1:]
        self.A11, self.A12 = A[:n1, :n1], A[:n1, n1:]
        self.A21, self.A22 = A[n1:, :n1], A[n1:, n1:]
        self.C11, self.C22 = C[:n1, :n1], C[n1:, n1:]

        if self.n2:
            try:
                self.g22_factor = cho_factor(self.G22.toarray())
            except np.linalg.LinAlgError as e:
                raise SingularSystemError(f"V_H^2 mass block is not positive definite: {e}") from e
            self.matrix = sp.bmat([
                [self.G11 / dt, -self.G11, None],
                [self.A11, self.G11 / dt, self.G12 / dt],
                [self.A21, self.G21 / dt, self.G22 / dt],
            ], format="csc")
        else:
            self.matrix = sp.bmat([
                [self.G11 / dt, -self.G11],
                [self.A11, self.G11 / dt],
            ], format="csc")
        self.lu = factorize(self.matrix, self.name)
        logger.debug(
            "Split step operator factorized",
            extra={"dim_v1": self.n1, "dim_v2": self.n2, "dim": self.matrix.shape[0]},
        )

    def explicit_v2(self, u2: np.ndarray, v2: np.ndarray) -> np.ndarray:
        """v2' = v2 + dt G22^-1 (-beta G22 v2 - C22 v2 + G22 u2)."""
        if not self.n2:
            return v2.copy()
        dt = self.dt
        return (1.0 - self.beta * dt) * v2 + dt * u2 - dt * cho_solve(self.g22_factor, self.C22 @ v2)

    def v2_residual(self, u2: np.ndarray, v2: np.ndarray, v2_new: np.ndarray) -> float:
        if not self.n2:
            return 0.0
        lhs = self.G22 @ (v2_new - v2) / self.dt
        rhs = -self.beta * (self.G22 @ v2) - self.C22 @ v2 + self.G22 @ u2
        scale = np.linalg.norm(lhs) + np.linalg.norm(rhs)
        return 0.0 if scale == 0.0 else float(np.linalg.norm(lhs - rhs) / scale)

    def rhs(self, state: CoupledState, v2_new: np.ndarray) -> np.ndarray:
        dt, n1 = self.dt, self.n1
        u1, u2, v1, _ = state.split(n1)
        mv = self.G11 @ v1
        rhs_v1 = mv / dt - self.beta * mv - self.C11 @ v1
        convection = self.galerkin.convection_uu @ state.u
        rhs_u1 = (self.G11 @ u1 + self.G12 @ u2) / dt - convection[:n1] - self.A12 @ v2_new + self.load[:n1]
        if not self.n2:
            return np.concatenate([rhs_v1, rhs_u1])
        rhs_u2 = (self.G21 @ u1 + self.G22 @ u2) / dt - convection[n1:] - self.A22 @ v2_new + self.load[n1:]
        return np.concatenate([rhs_v1, rhs_u1, rhs_u2])

    def step(self, state: CoupledState) -> CoupledState:
        self.check_state(state)
        n1 = self.n1
        _, u2, _, v2 = state.split(n1)
        v2_new = self.explicit_v2(u2, v2)
        rhs = self.rhs(state, v2_new)
        solution = self.lu.solve(rhs)
        self.last_residual = max(
            relative_residual(self.matrix, solution, rhs), self.v2_residual(u2, v2, v2_new)
        )
        v1_new = solution[:n1]
        u_new = solution[n1:]
        return CoupledState(
            n=state.n + 1,
            t=state.t + self.dt,
            u=u_new,
            v=(np.concatenate([v1_new, v2_new]),),
        )


def step_partially_explicit(state: CoupledState, scheme: PartiallyExplicitScheme) -> CoupledState:
    return scheme.step(state)
