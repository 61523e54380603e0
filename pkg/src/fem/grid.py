"""Construction of nested structured grids on the unit square."""

import numpy as np

from src.models.grid import GridHierarchy
from src.utils.errors import GridSizeError
from src.utils.logging import logger
from src.utils.validation_utils import validate_in_range

MAX_NODES = 2 ** 31 - 1


def build_grids(coarse_n: int, refine: int) -> GridHierarchy:
    """Build a coarse_n x coarse_n coarse grid refined ``refine`` times per side.

    Args:
        coarse_n: Coarse elements per side, at least 2
        refine: Fine cells per coarse cell per side, at least 1

    Returns:
        GridHierarchy with Q1 node numbering and element maps

    Raises:
        GridSizeError: If a count is too small or the node count overflows
    """
    if int(coarse_n) != coarse_n or int(refine) != refine:
        raise GridSizeError(f"grid counts must be integers, got ({coarse_n}, {refine})")
    coarse_n, refine = int(coarse_n), int(refine)
    validate_in_range(coarse_n, 2, None, "coarse_n", GridSizeError)
    validate_in_range(refine, 1, None, "refine", GridSizeError)
    fine_n = coarse_n * refine
    if (fine_n + 1) ** 2 > MAX_NODES:
        raise GridSizeError(f"fine grid {fine_n}x{fine_n} overflows the node index range")

    side = fine_n + 1
    jj, ii = np.divmod(np.arange(side * side, dtype=np.int64), side)
    coords = np.column_stack([ii / fine_n, jj / fine_n])

    cj, ci = np.divmod(np.arange(fine_n * fine_n, dtype=np.int64), fine_n)
    base = cj * side + ci
    cell_nodes = np.column_stack([base, base + 1, base + side + 1, base + side])

    element_nodes = []
    element_cells = []
    for J in range(coarse_n):
        for I in range(coarse_n):
            nodes_i, nodes_j = np.meshgrid(
                np.arange(I * refine, (I + 1) * refine + 1),
                np.arange(J * refine, (J + 1) * refine + 1),
            )
            element_nodes.append((nodes_j * side + nodes_i).ravel())
            cells_i, cells_j = np.meshgrid(
                np.arange(I * refine, (I + 1) * refine),
                np.arange(J * refine, (J + 1) * refine),
            )
            element_cells.append((cells_j * fine_n + cells_i).ravel())

    boundary = {
        "left": ii == 0,
        "right": ii == fine_n,
        "bottom": jj == 0,
        "top": jj == fine_n,
    }

    grid = GridHierarchy(
        coarse_n=coarse_n,
        refine=refine,
        coords=coords,
        cell_nodes=cell_nodes,
        element_nodes=element_nodes,
        element_cells=element_cells,
        boundary=boundary,
    )
    logger.info("Grid hierarchy built", extra=grid.to_dict())
    return grid


def cell_centers(grid: GridHierarchy) -> np.ndarray:
    """Coordinates of fine cell centers in cell order."""
    return grid.coords[grid.cell_nodes[:, 0]] + 0.5 * grid.h


def coarse_node_indices(grid: GridHierarchy) -> np.ndarray:
    """Fine node index of every coarse node, coarse nodes numbered row by row."""
    r = grid.refine
    I, J = np.meshgrid(np.arange(grid.coarse_n + 1), np.arange(grid.coarse_n + 1))
    return (J * r * (grid.fine_n + 1) + I * r).ravel().astype(np.int64)
