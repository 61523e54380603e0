"""Initial state, time loop, energies and reference errors of a scheme run."""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.fem.assembly import assemble_load
from src.models.grid import GridHierarchy, SparseOperator
from src.models.spaces import SchemeConstants
from src.models.state import CoupledState, EnergyTrace, SchemeConfig
from src.solvers.base import TimeScheme, energy
from src.solvers.implicit import ImplicitScheme
from src.solvers.operators import AnsatzSpace, FineOperators
from src.solvers.partially_explicit import PartiallyExplicitScheme, check_step_bound
from src.utils.logging import logger

# fine nodal values, or a function of (x1, x2) projected by quadrature
InitialValue = Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]

SCHEME_TYPES = {
    ImplicitScheme.name: ImplicitScheme,
    PartiallyExplicitScheme.name: PartiallyExplicitScheme,
}


@dataclass
class RunResult:
    """Trace, terminal state and fine nodal snapshots of one run."""

    config: SchemeConfig
    space: str
    trace: EnergyTrace
    final: CoupledState
    snapshots: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    history: Optional[List[np.ndarray]] = field(default=None, repr=False)

    def to_dict(self) -> Dict:
        energies = self.trace.energies
        return {
            **self.config.to_dict(),
            "space": self.space,
            "steps": len(self.trace) - 1,
            "E_initial": float(energies[0]),
            "E_final": float(energies[-1]),
            "max_residual": self.trace.max_residual,
        }


def initial_load(u0: InitialValue, operators: FineOperators, grid: Optional[GridHierarchy] = None) -> np.ndarray:
    """Fine load (u0, phi_p) of every Q1 hat.

    Nodal input is integrated exactly through the mass matrix; a function is
    integrated by Gauss quadrature on the fine cells of ``grid``.

    Raises:
        ValueError: If nodal u0 has the wrong length or a function comes without a grid
    """
    if callable(u0):
        if grid is None:
            raise ValueError("a function u0 needs the grid for quadrature")
        return assemble_load(grid, u0)
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (operators.n_nodes,):
        raise ValueError(f"u0 has shape {u0.shape}, expected ({operators.n_nodes},)")
    return np.asarray(operators.mass.matrix @ u0)


def init_state(
    u0: Optional[InitialValue],
    space: AnsatzSpace,
    operators: FineOperators,
    M: int,
    grid: Optional[GridHierarchy] = None,
) -> CoupledState:
    """L2 projection (u_H^0, psi) = (u0, psi) onto the u-space; every v_i starts at zero."""
    v = tuple(np.zeros(space.dim_v) for _ in range(M))
    if u0 is None:
        return CoupledState(n=0, t=0.0, u=np.zeros(space.dim_u), v=v)
    load = initial_load(u0, operators, grid)
    B = space.basis_u
    gram = sp.csc_matrix(B.T @ (operators.mass.matrix @ B))
    rhs = np.asarray(B.T @ load)
    coeffs = splu(gram).solve(rhs) if space.dim_u else np.zeros(0)
    return CoupledState(n=0, t=0.0, u=coeffs, v=v)


def relative_l2_error(
    u_coarse: np.ndarray,
    u_reference: np.ndarray,
    prolongation: Optional[sp.spmatrix],
    fine_mass: SparseOperator,
) -> float:
    """||P u - u_ref||_M / ||u_ref||_M on fine nodes.

    Raises:
        ValueError: If the reference has zero norm
    """
    fine = np.asarray(u_coarse) if prolongation is None else np.asarray(prolongation @ u_coarse)
    reference = np.asarray(u_reference, dtype=float)
    norm = np.sqrt(fine_mass.quadratic(reference, reference))
    if norm == 0.0:
        raise ValueError("reference solution has zero L2 norm")
    diff = fine - reference
    return float(np.sqrt(max(fine_mass.quadratic(diff, diff), 0.0)) / norm)


def make_scheme(config: SchemeConfig, space: AnsatzSpace, operators: FineOperators) -> TimeScheme:
    return SCHEME_TYPES[config.scheme](space, operators, config)


def _damping_increment(scheme: TimeScheme, before: CoupledState, after: CoupledState) -> float:
    """beta_i dt (|v_i^{n+1}|_A^2 + |v_i^n|_A^2) summed over the memory terms."""
    ops = scheme.galerkin
    total = 0.0
    for beta, a, old, new in zip(ops.betas, ops.stiffness_vv, before.v, after.v):
        total += beta * scheme.dt * (float(new @ (a @ new)) + float(old @ (a @ old)))
    return total


def run(
    config: SchemeConfig,
    space: AnsatzSpace,
    operators: FineOperators,
    u0: Optional[InitialValue] = None,
    reference: Optional[Sequence[np.ndarray]] = None,
    constants: Optional[SchemeConstants] = None,
    keep_history: bool = False,
    grid: Optional[GridHierarchy] = None,
) -> RunResult:
    """Advance N_T steps, recording energies, residuals and errors at every level.

    Args:
        config: Scheme, step and kernel of the run
        space: Ansatz space the scheme works in
        operators: Fine operators of the problem
        u0: Fine nodal initial value or a function of (x1, x2); zero when None
        reference: Fine nodal reference u at levels 0..N_T
        constants: Step bound of the split scheme, checked before stepping
        keep_history: Keep fine nodal u of every level in the result
        grid: Fine grid, needed when u0 is a function

    Returns:
        RunResult with the energy trace, terminal state and snapshots
    """
    if reference is not None and len(reference) < config.n_steps + 1:
        raise ValueError(f"reference has {len(reference)} levels, run needs {config.n_steps + 1}")
    if config.scheme == PartiallyExplicitScheme.name:
        check_step_bound(config, constants)

    scheme = make_scheme(config, space, operators)
    state = init_state(u0, space, operators, config.kernel.M, grid)
    trace = EnergyTrace()
    snapshots: Dict[int, np.ndarray] = {}
    history: Optional[List[np.ndarray]] = [] if keep_history else None
    damping = 0.0
    logger.info("Run started", extra={**config.to_dict(), "dim_u": space.dim_u, "space": space.name})

    def record(current: CoupledState, residual: Optional[float]) -> None:
        fine_u = space.prolong(current.u)
        error = None
        if reference is not None:
            ref = np.asarray(reference[current.n], dtype=float)
            if operators.mass.quadratic(ref, ref) > 0.0:
                error = relative_l2_error(fine_u, ref, None, operators.mass)
        E, E_split = scheme.energy(current)
        trace.record(current.n, current.t, E, E_split, error, residual, E + damping)
        stride = config.snapshot_stride
        if current.n == config.n_steps or (stride and current.n % stride == 0):
            snapshots[current.n] = fine_u
        if history is not None:
            history.append(fine_u)

    record(state, None)
    for _ in range(config.n_steps):
        new_state = scheme.step(state)
        damping += _damping_increment(scheme, state, new_state)
        state = new_state
        record(state, scheme.last_residual)

    result = RunResult(
        config=config, space=space.name, trace=trace, final=state, snapshots=snapshots, history=history
    )
    logger.info("Run finished", extra=result.to_dict())
    return result
