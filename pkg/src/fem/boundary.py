"""Boundary restriction, prolongation and nodal interpolation."""

from typing import Callable, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from src.models.grid import SIDES, BoundaryCondition, BoundaryKind, GridHierarchy, SparseOperator

# outward normals of the unit square
_NORMALS = {
    "left": (-1.0, 0.0),
    "right": (1.0, 0.0),
    "bottom": (0.0, -1.0),
    "top": (0.0, 1.0),
}

KindLike = Union[BoundaryKind, BoundaryCondition, str]


def _kind(kind: KindLike) -> BoundaryKind:
    if isinstance(kind, BoundaryCondition):
        return kind.u
    return BoundaryKind(kind)


def inflow_sides(velocity_tilde: Sequence[float]) -> list:
    """Sides of the unit square where velocity . n < 0."""
    a = np.asarray(velocity_tilde, dtype=float)
    return [side for side, normal in _NORMALS.items() if a @ np.asarray(normal) < 0]


def inflow_mask(grid: GridHierarchy, velocity_tilde: Sequence[float]) -> np.ndarray:
    """Fine nodes on the inflow boundary Gamma."""
    mask = np.zeros(grid.n_nodes, dtype=bool)
    for side in inflow_sides(velocity_tilde):
        mask |= grid.boundary[side]
    return mask


def free_sides(kind: KindLike, velocity_tilde: Sequence[float] = (0.0, 0.0)) -> Tuple[str, ...]:
    """Domain sides on which nodes keep a free value under the given boundary kind."""
    kind = _kind(kind)
    if kind is BoundaryKind.DIRICHLET:
        return ()
    if kind is BoundaryKind.INFLOW:
        closed = inflow_sides(velocity_tilde)
        return tuple(side for side in SIDES if side not in closed)
    return SIDES


def constrained_mask(
    grid: GridHierarchy,
    kind: KindLike,
    velocity_tilde: Sequence[float] = (0.0, 0.0),
) -> np.ndarray:
    """Nodes whose values are fixed to zero under the given boundary kind."""
    kind = _kind(kind)
    if kind is BoundaryKind.DIRICHLET:
        return grid.boundary_mask
    if kind is BoundaryKind.INFLOW:
        return inflow_mask(grid, velocity_tilde)
    return np.zeros(grid.n_nodes, dtype=bool)


def free_nodes(
    grid: GridHierarchy,
    kind: KindLike,
    velocity_tilde: Sequence[float] = (0.0, 0.0),
) -> np.ndarray:
    return np.flatnonzero(~constrained_mask(grid, kind, velocity_tilde)).astype(np.int64)


def free_node_basis(
    grid: GridHierarchy,
    kind: KindLike,
    velocity_tilde: Sequence[float] = (0.0, 0.0),
) -> sp.csc_matrix:
    """Prolongation matrix from free-node coefficients to all fine nodes."""
    free = free_nodes(grid, kind, velocity_tilde)
    return sp.csc_matrix(
        (np.ones(free.size), (free, np.arange(free.size))),
        shape=(grid.n_nodes, free.size),
    )


def restrict_dirichlet(
    target: Union[SparseOperator, np.ndarray],
    grid: GridHierarchy,
    kind: KindLike = BoundaryKind.DIRICHLET,
    velocity_tilde: Sequence[float] = (0.0, 0.0),
):
    """Drop the constrained rows and columns of an operator, or entries of a vector.

    Neumann input is returned unchanged.
    """
    if _kind(kind) is BoundaryKind.NEUMANN:
        return target
    free = free_nodes(grid, kind, velocity_tilde)
    if isinstance(target, SparseOperator):
        matrix = target.matrix[free][:, free].tocsr()
        return SparseOperator(matrix=matrix, symmetric=target.symmetric, name=target.name)
    return np.asarray(target)[free]


def prolong(
    values: np.ndarray,
    grid: GridHierarchy,
    kind: KindLike = BoundaryKind.DIRICHLET,
    velocity_tilde: Sequence[float] = (0.0, 0.0),
) -> np.ndarray:
    """Reinsert zeros at constrained nodes; inverse of ``restrict_dirichlet`` on vectors."""
    if _kind(kind) is BoundaryKind.NEUMANN:
        return np.asarray(values, dtype=float)
    free = free_nodes(grid, kind, velocity_tilde)
    values = np.asarray(values, dtype=float)
    full = np.zeros((grid.n_nodes,) + values.shape[1:])
    full[free] = values
    return full


def interpolate(grid: GridHierarchy, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Nodal Q1 interpolant of ``func(x1, x2)``."""
    x, y = grid.coords[:, 0], grid.coords[:, 1]
    return np.broadcast_to(np.asarray(func(x, y), dtype=float), x.shape).copy()


def product_sine(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """sin(pi x1) sin(pi x2)."""
    return np.sin(np.pi * x) * np.sin(np.pi * y)
