"""Oversampled coarse neighborhoods K_{i,m}."""

from functools import lru_cache
from typing import Sequence, Tuple

import networkx as nx
import numpy as np

from src.models.grid import GridHierarchy
from src.utils.validation_utils import validate_in_range


@lru_cache(maxsize=8)
def coarse_adjacency(coarse_n: int) -> nx.Graph:
    """Coarse elements as nodes, joined when their closures intersect."""
    graph = nx.grid_2d_graph(coarse_n, coarse_n)
    graph.add_edges_from(
        ((I, J), (I + dI, J + 1))
        for I in range(coarse_n)
        for J in range(coarse_n - 1)
        for dI in (-1, 1)
        if 0 <= I + dI < coarse_n
    )
    return graph


def oversample(grid: GridHierarchy, element: int, m: int) -> np.ndarray:
    """Elements of K_{i,m}: m layers of touching elements around K_i, clipped at the boundary."""
    validate_in_range(m, 0, None, "oversampling layers")
    graph = coarse_adjacency(grid.coarse_n)
    reached = nx.single_source_shortest_path_length(graph, grid.element_position(element), cutoff=m)
    return np.array(sorted(J * grid.coarse_n + I for I, J in reached), dtype=np.int64)


def region_box(grid: GridHierarchy, elements: np.ndarray) -> Tuple[int, int, int, int]:
    """Fine index box (i0, i1, j0, j1) covering a rectangular block of elements."""
    I = elements % grid.coarse_n
    J = elements // grid.coarse_n
    r = grid.refine
    return int(I.min()) * r, (int(I.max()) + 1) * r, int(J.min()) * r, (int(J.max()) + 1) * r


def region_free_nodes(grid: GridHierarchy, elements: np.ndarray, free_sides: Sequence[str] = ()) -> np.ndarray:
    """Fine nodes of K_{i,m} left free by the basis problems.

    The basis vanishes on the part of the boundary of K_{i,m} inside the
    domain; on the domain sides listed in ``free_sides`` it is unconstrained.
    """
    return grid.box_free_nodes(*region_box(grid, elements), free_sides)
