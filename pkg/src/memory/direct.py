"""Direct discretization of the memory equation with a stored history.

Each step solves

    M (u^{n+1} - u^n) / dt + C_a u^n + sum_i A_i w_i^{n+1} = g
    w_i^{n+1} = sum_{k=0}^{n} dt exp(-beta_i (t^{n+1} - t^k)) u^k(x - (t^{n+1} - t^k) a~)

with the left-rectangle rule over every stored level. The memory term sits
at t^{n+1}, but its sum only reads u^0..u^n, so nothing on the right depends
on u^{n+1} and each step is a forward Euler update with the mass matrix on
the left. The work grows with the square of the step count, so this solver
is meant for small problems only.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator

from src.memory.trajectory import evaluate_history, level_interpolator, trajectory_foot
from src.models.grid import GridHierarchy
from src.models.memory import HistoryBuffer
from src.models.state import EnergyTrace, SchemeConfig
from src.solvers.base import factorize
from src.solvers.operators import FineOperators, fine_space, source_load
from src.solvers.runner import init_state, relative_l2_error, run
from src.utils.logging import logger
from src.utils.validation_utils import validate_in_range, validate_list_not_empty

MAX_FINE_N = 40
MAX_STEPS = 200


class MemoryDirectSolver:
    """Explicit step: one mass solve per level, convection at u^n, memory load from the stored levels."""

    def __init__(self, grid: GridHierarchy, operators: FineOperators, config: SchemeConfig):
        self.grid = grid
        self.config = config
        self.dt = config.dt
        self.space = fine_space(grid, config.bc, config.velocity_tilde)
        B = self.space.basis_u
        self.mass = sp.csc_matrix(B.T @ operators.mass.matrix @ B)
        self.lu = factorize(self.mass, "memory_direct")
        self.convection = sp.csr_matrix(B.T @ operators.convection.matrix @ B)
        self.stiffness = [sp.csr_matrix(B.T @ a.matrix) for a in operators.stiffness]
        self.betas = list(operators.betas)
        self.load = source_load(self.space, operators, config.source)
        self._interpolators: List[RegularGridInterpolator] = []

    def _interpolator(self, history: HistoryBuffer, k: int) -> RegularGridInterpolator:
        while len(self._interpolators) <= k:
            level = len(self._interpolators)
            self._interpolators.append(level_interpolator(self.grid, history.levels[level]))
        return self._interpolators[k]

    def history_integral(self, history: HistoryBuffer, beta: float) -> np.ndarray:
        """Fine nodal w^{n+1} for one memory term."""
        t_next = history.time(history.n + 1)
        at_rest = not np.any(self.config.velocity_tilde)
        total = np.zeros(self.grid.n_nodes)
        for k, level in enumerate(history.levels):
            t_k = history.time(k)
            if at_rest:
                values = level
            else:
                foot = trajectory_foot(self.grid.coords, t_next, t_k, self.config.velocity_tilde)
                values = evaluate_history(self.grid, self._interpolator(history, k), foot)
            total += self.dt * math.exp(-beta * (t_next - t_k)) * values
        return total

    def memory_load(self, history: HistoryBuffer) -> np.ndarray:
        """sum_i A_i w_i tested against the free nodes."""
        load = np.zeros(self.space.dim_u)
        for a, beta in zip(self.stiffness, self.betas):
            load += a @ self.history_integral(history, beta)
        return load

    def step(self, history: HistoryBuffer) -> np.ndarray:
        """Fine nodal u^{n+1}; the caller appends it to the history."""
        u = self.space.basis_u.T @ history.latest()
        rhs = self.mass @ u + self.dt * (self.load - self.convection @ u - self.memory_load(history))
        return self.space.prolong(self.lu.solve(rhs))


def step_memory_direct(history: HistoryBuffer, solver: MemoryDirectSolver) -> np.ndarray:
    return solver.step(history)


@dataclass
class DirectRunResult:
    trace: EnergyTrace
    history: HistoryBuffer = field(repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.history.latest()


def run_memory_direct(
    grid: GridHierarchy,
    operators: FineOperators,
    config: SchemeConfig,
    u0: Optional[np.ndarray] = None,
) -> DirectRunResult:
    """Advance N_T steps, keeping every level; energies are ||u||_M^2."""
    solver = MemoryDirectSolver(grid, operators, config)
    start = init_state(u0, solver.space, operators, config.kernel.M)
    history = HistoryBuffer(dt=config.dt)
    history.append(solver.space.prolong(start.u))
    trace = EnergyTrace()

    def record(n: int, u: np.ndarray) -> None:
        E = operators.mass.quadratic(u, u)
        trace.record(n, n * config.dt, E, E)

    record(0, history.latest())
    for n in range(1, config.n_steps + 1):
        history.append(solver.step(history))
        record(n, history.latest())
    logger.info(
        "Direct memory run finished",
        extra={"steps": config.n_steps, "dt": config.dt, "E_final": float(trace.energies[-1])},
    )
    return DirectRunResult(trace=trace, history=history)


@dataclass
class ConvergenceReport:
    """Terminal gaps between the direct and dememorized solutions per step size."""

    dts: List[float]
    gaps: List[float]
    orders: List[float] = field(default_factory=list)

    @property
    def observed_order(self) -> Optional[float]:
        return self.orders[-1] if self.orders else None

    def to_dict(self) -> Dict:
        return {
            "dts": self.dts,
            "gaps": self.gaps,
            "orders": self.orders,
            "observed_order": self.observed_order,
        }


def compare_dememorized(
    grid: GridHierarchy,
    operators: FineOperators,
    config: SchemeConfig,
    dts: Sequence[float],
    T: float,
    u0: Optional[np.ndarray] = None,
) -> ConvergenceReport:
    """Terminal relative L2 gap between the direct solver and the fine implicit scheme.

    Args:
        grid: Grid hierarchy, at most 40 x 40 fine cells
        operators: Fine operators of the problem
        config: Template run; its scheme, dt and step count are replaced
        dts: Step sizes, each dividing T into at most 200 steps
        T: Final time
        u0: Fine nodal initial value

    Returns:
        ConvergenceReport with one gap per step size and the orders between them
    """
    validate_list_not_empty(list(dts), "dts")
    validate_in_range(grid.fine_n, 1, MAX_FINE_N, "fine_n")
    gaps = []
    for dt in dts:
        n_steps = int(round(T / dt))
        validate_in_range(n_steps, 1, MAX_STEPS, "n_steps")
        step_config = dataclasses.replace(config, scheme="implicit", dt=T / n_steps, n_steps=n_steps, space="fine")
        direct = run_memory_direct(grid, operators, step_config, u0).final
        dememorized = run(step_config, fine_space(grid, config.bc, config.velocity_tilde), operators, u0)
        reference = dememorized.snapshots[n_steps]
        gaps.append(relative_l2_error(direct, reference, None, operators.mass))
        logger.debug("Dememorization gap", extra={"dt": dt, "gap": gaps[-1]})

    orders = [
        math.log(g0 / g1) / math.log(d0 / d1)
        for (d0, g0), (d1, g1) in zip(zip(dts, gaps), zip(dts[1:], gaps[1:]))
        if g0 > 0 and g1 > 0
    ]
    report = ConvergenceReport(dts=[float(d) for d in dts], gaps=gaps, orders=orders)
    logger.info("Dememorization comparison", extra=report.to_dict())
    return report
