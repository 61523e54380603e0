"""Assembly of the full V_H^1 + V_H^2 decomposition from per-element solves."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from src.fem.assembly import assemble_mass, assemble_stiffness, local_stiffness
from src.fem.boundary import KindLike, free_sides, inflow_mask
from src.models.fields import PermeabilityField
from src.models.grid import GridHierarchy, SparseOperator
from src.models.spaces import AuxiliaryBasis, LocalEigenpairs, SpaceDecomposition
from src.multiscale.auxiliary import build_auxiliary_basis
from src.multiscale.basis import solve_cem_basis, solve_explicit_basis, solve_explicit_eigen
from src.multiscale.constants import gram
from src.utils.logging import logger
from src.utils.validation_utils import validate_in_range


def _map_elements(func: Callable[[int], Dict], n_elements: int, workers: int) -> List[Dict]:
    """Run per-element solves, keeping element order regardless of workers."""
    if workers <= 1:
        return [func(e) for e in range(n_elements)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(n_elements)))


def _columns(solves: Sequence[Dict], n_nodes: int) -> sp.csc_matrix:
    rows, cols, vals = [], [], []
    offset = 0
    for solve in solves:
        nodes, values = solve["nodes"], solve["values"]
        count = values.shape[1]
        rows.append(np.repeat(nodes, count))
        cols.append(np.tile(np.arange(count), nodes.size) + offset)
        vals.append(values.ravel())
        offset += count
    if offset == 0:
        return sp.csc_matrix((n_nodes, 0))
    matrix = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_nodes, offset),
    )
    matrix.eliminate_zeros()
    return matrix


def _labels(entries: Sequence[LocalEigenpairs]) -> np.ndarray:
    labels = [(entry.element, j) for entry in entries for j in range(entry.count)]
    return np.array(labels, dtype=np.int64).reshape(-1, 2)


def build_space_decomposition(
    grid: GridHierarchy,
    kappa: PermeabilityField,
    n_aux: int = 3,
    n_explicit: int = 3,
    oversampling: int = 4,
    weight_choice: str = "kappa_grad_chi",
    workers: int = 1,
    stiffness: Optional[SparseOperator] = None,
    mass: Optional[SparseOperator] = None,
    boundary: KindLike = "dirichlet",
    velocity_tilde: Sequence[float] = (0.0, 0.0),
) -> SpaceDecomposition:
    """Build V_H^1 (CEM basis) and V_H^2 (explicit basis) on every coarse element.

    Args:
        grid: Grid hierarchy
        kappa: Permeability of the stiffness form
        n_aux: Auxiliary modes L_i per element
        n_explicit: Explicit modes J_i per element; 0 gives an empty V_H^2
        oversampling: Layers m of K_{i,m}
        weight_choice: ``kappa_grad_chi`` or ``kappa_h2``
        workers: Threads for the independent per-element solves
        boundary: Boundary kind of u; Neumann keeps the basis free on the domain
            boundary, inflow only off the inflow sides of ``velocity_tilde``

    Returns:
        Immutable SpaceDecomposition with Gram blocks under M and A
    """
    validate_in_range(n_aux, 1, None, "n_aux")
    validate_in_range(n_explicit, 0, None, "n_explicit")
    validate_in_range(oversampling, 0, None, "oversampling")
    stiffness = stiffness or assemble_stiffness(grid, kappa)
    mass = mass or assemble_mass(grid)

    sides = free_sides(boundary, velocity_tilde)
    aux = build_auxiliary_basis(grid, kappa, n_aux, weight_choice, stiffness, sides)
    v1_solves = _map_elements(
        lambda e: solve_cem_basis(grid, stiffness, aux, e, oversampling, sides), grid.n_elements, workers
    )
    basis_v1 = _columns(v1_solves, grid.n_nodes)

    explicit: List[LocalEigenpairs] = []
    basis_v2 = sp.csc_matrix((grid.n_nodes, 0))
    if n_explicit > 0:
        explicit = _map_elements(
            lambda e: solve_explicit_eigen(grid, stiffness, mass, aux, e, n_explicit),
            grid.n_elements,
            workers,
        )
        v2_solves = _map_elements(
            lambda e: solve_explicit_basis(grid, stiffness, mass, aux, explicit, e, oversampling, sides),
            grid.n_elements,
            workers,
        )
        basis_v2 = _columns(v2_solves, grid.n_nodes)

    grams = {
        "M11": gram(basis_v1, mass),
        "A11": gram(basis_v1, stiffness),
        "M22": gram(basis_v2, mass),
        "A22": gram(basis_v2, stiffness),
        "M12": gram(basis_v1, mass, basis_v2),
        "A12": gram(basis_v1, stiffness, basis_v2),
    }
    decomposition = SpaceDecomposition(
        basis_v1=basis_v1,
        basis_v2=basis_v2,
        v1_labels=_labels(aux.entries),
        v2_labels=_labels(explicit),
        aux=aux,
        explicit=explicit,
        oversampling=oversampling,
        gram=grams,
        free_sides=tuple(sides),
    )
    logger.info("Space decomposition built", extra=decomposition.to_dict())
    return decomposition


def cross_energy(decomposition: SpaceDecomposition, stiffness: SparseOperator) -> float:
    """max |a(phi, zeta)| / (|phi|_a |zeta|_a) over V_H^1 and V_H^2 columns."""
    if decomposition.dim_v2 == 0:
        return 0.0
    norms1 = np.sqrt(np.diag(decomposition.gram["A11"]))
    norms2 = np.sqrt(np.diag(decomposition.gram["A22"]))
    cross = gram(decomposition.basis_v1, stiffness, decomposition.basis_v2)
    return float(np.max(np.abs(cross) / np.outer(norms1, norms2)))


def localized_energy(
    grid: GridHierarchy,
    kappa: PermeabilityField,
    values: np.ndarray,
    cells: np.ndarray,
) -> float:
    """a(u, u) restricted to the given fine cells."""
    local = grid.cell_nodes[cells]
    u = values[local]
    return float(np.einsum("ca,ab,cb,c->", u, local_stiffness(), u, kappa.cellwise[cells]))


def inflow_augmentation(
    grid: GridHierarchy,
    basis: sp.spmatrix,
    velocity_tilde: Sequence[float],
) -> sp.csc_matrix:
    """W_H = span(basis) + span of fine hats on the inflow boundary Gamma."""
    nodes = np.flatnonzero(inflow_mask(grid, velocity_tilde))
    hats = sp.csc_matrix(
        (np.ones(nodes.size), (nodes, np.arange(nodes.size))), shape=(grid.n_nodes, nodes.size)
    )
    logger.debug("Inflow augmentation", extra={"inflow_nodes": int(nodes.size)})
    return sp.hstack([basis, hats], format="csc")


def summarize(decomposition: SpaceDecomposition, stiffness: SparseOperator) -> Dict:
    """Dimensions, eigenvalue ranges and cross energy of a decomposition."""
    aux_values = np.concatenate([entry.eigenvalues for entry in decomposition.aux.entries])
    summary = {
        **decomposition.to_dict(),
        "aux_eigenvalue_min": float(aux_values.min()),
        "aux_eigenvalue_max": float(aux_values.max()),
        "cross_energy": cross_energy(decomposition, stiffness),
    }
    if decomposition.explicit:
        explicit_values = np.concatenate([entry.eigenvalues for entry in decomposition.explicit])
        summary["explicit_eigenvalue_min"] = float(explicit_values.min())
        summary["explicit_eigenvalue_max"] = float(explicit_values.max())
    return summary
