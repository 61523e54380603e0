"""Q1 assembly of mass, weighted stiffness and convection operators."""

from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from src.models.fields import PermeabilityField
from src.models.grid import GridHierarchy, SparseOperator
from src.utils.logging import logger
from src.utils.validation_utils import validate_finite

CellWeight = Union[None, float, np.ndarray, PermeabilityField]

# reference corners (0,0), (1,0), (1,1), (0,1) in local node order
_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _gauss_points(n_points: int = 2) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor Gauss rule on [0,1]^2 as (xi, eta, weights)."""
    points, weights = np.polynomial.legendre.leggauss(n_points)
    points = 0.5 * (points + 1.0)
    weights = 0.5 * weights
    xi, eta = np.meshgrid(points, points, indexing="ij")
    return xi.ravel(), eta.ravel(), np.outer(weights, weights).ravel()


def _reference_element(n_points: int = 2) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Q1 values and reference gradients at the Gauss points of [0,1]^2.

    Returns:
        (weights, values[q, a], grads[q, a, d])
    """
    xi, eta, w = _gauss_points(n_points)
    sx = 2.0 * _CORNERS[:, 0] - 1.0
    sy = 2.0 * _CORNERS[:, 1] - 1.0
    fx = np.where(sx[None, :] > 0, xi[:, None], 1.0 - xi[:, None])
    fy = np.where(sy[None, :] > 0, eta[:, None], 1.0 - eta[:, None])
    values = fx * fy
    grads = np.stack([sx[None, :] * fy, sy[None, :] * fx], axis=-1)
    return w, values, grads


def local_mass(h: float) -> np.ndarray:
    """Unweighted Q1 element mass matrix of a side-h square."""
    w, values, _ = _reference_element()
    local = h * h * np.einsum("q,qa,qb->ab", w, values, values)
    return 0.5 * (local + local.T)


def local_stiffness() -> np.ndarray:
    """Unweighted Q1 element stiffness matrix; independent of the side length in 2D."""
    w, _, grads = _reference_element()
    local = np.einsum("q,qad,qbd->ab", w, grads, grads)
    return 0.5 * (local + local.T)


def local_convection(h: float, velocity: Sequence[float]) -> np.ndarray:
    """Element matrix C[a, b] = int (velocity . grad N_b) N_a on a side-h square."""
    w, values, grads = _reference_element()
    directional = grads @ np.asarray(velocity, dtype=float)
    return h * np.einsum("q,qa,qb->ab", w, values, directional)


def _cell_weights(grid: GridHierarchy, weight: CellWeight, name: str) -> np.ndarray:
    if weight is None:
        return np.ones(grid.n_cells)
    if isinstance(weight, PermeabilityField):
        values = weight.cellwise
    elif np.isscalar(weight):
        values = np.full(grid.n_cells, float(weight))
    else:
        values = np.asarray(weight, dtype=float).ravel()
    if values.size != grid.n_cells:
        raise ValueError(
            f"{name} has {values.size} cells but the fine grid has {grid.n_cells}"
        )
    validate_finite(values, name)
    bad = np.flatnonzero(values <= 0)
    if bad.size:
        row, col = divmod(int(bad[0]), grid.fine_n)
        msg = f"{name} must be positive; cell (row={row}, col={col}) has value {values[bad[0]]}"
        logger.error(msg)
        raise ValueError(msg)
    return values


def _assemble(
    grid: GridHierarchy,
    local: np.ndarray,
    weights: np.ndarray,
    symmetric: bool,
    name: str,
) -> SparseOperator:
    nodes = grid.cell_nodes
    rows = np.repeat(nodes, 4, axis=1).ravel()
    cols = np.tile(nodes, (1, 4)).ravel()
    vals = (weights[:, None] * local.ravel()[None, :]).ravel()
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(grid.n_nodes, grid.n_nodes)).tocsr()
    if symmetric:
        matrix = ((matrix + matrix.T) * 0.5).tocsr()
    matrix.sort_indices()
    logger.debug(f"Assembled {name}", extra={"nnz": matrix.nnz, "n_nodes": grid.n_nodes})
    return SparseOperator(matrix=matrix, symmetric=symmetric, name=name)


def assemble_mass(grid: GridHierarchy, weight: CellWeight = None) -> SparseOperator:
    """Assemble the (optionally cell-weighted) Q1 mass matrix.

    Args:
        grid: Grid hierarchy
        weight: Positive per-cell weight, a scalar, or None for unit weight

    Raises:
        ValueError: If a weight cell is not positive
    """
    weights = _cell_weights(grid, weight, "mass weight")
    return _assemble(grid, local_mass(grid.h), weights, True, "mass")


def assemble_stiffness(grid: GridHierarchy, kappa: CellWeight) -> SparseOperator:
    """Assemble the kappa-weighted Q1 stiffness matrix int kappa grad u . grad v."""
    weights = _cell_weights(grid, kappa, "kappa")
    return _assemble(grid, local_stiffness(), weights, True, "stiffness")


def assemble_convection(
    grid: GridHierarchy,
    velocity: Sequence[float],
    name: Optional[str] = None,
) -> SparseOperator:
    """Assemble C[p, q] = int (velocity . grad phi_q) phi_p for a constant velocity."""
    velocity = validate_finite(velocity, "velocity")
    if velocity.shape != (2,):
        raise ValueError(f"velocity must have two components, got shape {velocity.shape}")
    local = local_convection(grid.h, velocity)
    op = _assemble(grid, local, np.ones(grid.n_cells), False, name or "convection")
    if not np.any(velocity):
        op = SparseOperator(sp.csr_matrix(op.matrix.shape), symmetric=True, name=op.name)
    return op


def assemble_load(
    grid: GridHierarchy,
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n_points: int = 3,
) -> np.ndarray:
    """Load vector int func(x) phi_p(x) dx over the fine cells, by tensor Gauss quadrature.

    ``func`` takes coordinate arrays ``(x1, x2)`` and returns values of the
    same shape.
    """
    xi, eta, w = _gauss_points(n_points)
    _, values, _ = _reference_element(n_points)
    origin = grid.coords[grid.cell_nodes[:, 0]]
    x = origin[:, 0, None] + grid.h * xi[None, :]
    y = origin[:, 1, None] + grid.h * eta[None, :]
    samples = np.broadcast_to(np.asarray(func(x, y), dtype=float), x.shape)
    validate_finite(samples, "load samples")
    local = grid.h * grid.h * np.einsum("q,cq,qa->ca", w, samples, values)
    return np.bincount(grid.cell_nodes.ravel(), weights=local.ravel(), minlength=grid.n_nodes)
