"""Coarse-node partition of unity and the auxiliary s-weight."""

import numpy as np
import scipy.sparse as sp

from src.models.fields import PermeabilityField
from src.models.grid import GridHierarchy

WEIGHT_CHOICES = ("kappa_grad_chi", "kappa_h2")


def partition_of_unity(grid: GridHierarchy) -> sp.csc_matrix:
    """Bilinear coarse hats chi_k sampled at fine nodes, one column per coarse node."""
    n = grid.coarse_n
    # coordinates in coarse units, from exact integer fine indices
    x, y = (np.rint(grid.coords[:, d] * grid.fine_n) / grid.refine for d in (0, 1))
    cols, rows, vals = [], [], []
    node_ids = np.arange(grid.n_nodes)
    coarse_j, coarse_i = np.divmod(np.arange((n + 1) ** 2), n + 1)
    for K, (ci, cj) in enumerate(zip(coarse_i, coarse_j)):
        hat = np.clip(1.0 - np.abs(x - ci), 0.0, None) * np.clip(1.0 - np.abs(y - cj), 0.0, None)
        support = hat > 0
        rows.append(node_ids[support])
        cols.append(np.full(support.sum(), K))
        vals.append(hat[support])
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.n_nodes, (n + 1) ** 2),
    )


def element_coarse_nodes(grid: GridHierarchy, element: int) -> np.ndarray:
    """Coarse node numbers of the four corners of a coarse element."""
    I, J = grid.element_position(element)
    side = grid.coarse_n + 1
    base = J * side + I
    return np.array([base, base + 1, base + side + 1, base + side])


def cell_gradients(grid: GridHierarchy, nodal: np.ndarray) -> np.ndarray:
    """Gradient of the Q1 interpolant at every fine cell center, shape (n_cells, 2)."""
    v = nodal[grid.cell_nodes]
    dx = (v[:, 1] - v[:, 0] + v[:, 2] - v[:, 3]) / (2.0 * grid.h)
    dy = (v[:, 3] - v[:, 0] + v[:, 2] - v[:, 1]) / (2.0 * grid.h)
    return np.column_stack([dx, dy])


def grad_chi_squared(grid: GridHierarchy, chi: sp.csc_matrix = None) -> np.ndarray:
    """Per fine cell, sum over the corners of its coarse element of |grad chi|^2."""
    chi = partition_of_unity(grid) if chi is None else chi
    squared = {}
    weight = np.zeros(grid.n_cells)
    for element in range(grid.n_elements):
        cells = grid.element_cells[element]
        for k in element_coarse_nodes(grid, element):
            if k not in squared:
                grads = cell_gradients(grid, chi[:, k].toarray().ravel())
                squared[k] = np.sum(grads ** 2, axis=1)
            weight[cells] += squared[k][cells]
    return weight


def auxiliary_weight(
    grid: GridHierarchy,
    kappa: PermeabilityField,
    weight_choice: str = "kappa_grad_chi",
) -> np.ndarray:
    """Cellwise kappa~ used by the s_i inner products.

    ``kappa_grad_chi`` is kappa * sum |grad chi|^2 and ``kappa_h2`` is
    kappa / H^2 with H the coarse side length.
    """
    if weight_choice == "kappa_grad_chi":
        return kappa.cellwise * grad_chi_squared(grid)
    if weight_choice == "kappa_h2":
        return kappa.cellwise / grid.H ** 2
    raise ValueError(f"unknown weight choice {weight_choice!r}; expected one of {WEIGHT_CHOICES}")
