"""Constrained energy minimizing basis functions of V_H^1 and V_H^2."""

from typing import Dict, List, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import null_space

from src.models.grid import GridHierarchy, SparseOperator
from src.models.spaces import AuxiliaryBasis, LocalEigenpairs
from src.multiscale.local_solvers import (
    fix_signs,
    local_block,
    smallest_eigenpairs,
    solve_saddle_point,
)
from src.multiscale.oversampling import oversample, region_free_nodes
from src.utils.errors import RankDeficiencyError
from src.utils.logging import logger


def _local_rows(entries: Sequence[LocalEigenpairs], region: np.ndarray, n_nodes: int) -> sp.csr_matrix:
    """Columns of the given eigenfunctions restricted to region nodes, as rows."""
    position = np.full(n_nodes, -1, dtype=np.int64)
    position[region] = np.arange(region.size)
    rows, cols, vals = [], [], []
    offset = 0
    for entry in entries:
        local = position[entry.nodes]
        if np.any(local < 0):
            raise ValueError(f"eigenfunctions of element {entry.element} leave the oversampled region")
        rows.append(np.tile(np.arange(entry.count), entry.nodes.size) + offset)
        cols.append(np.repeat(local, entry.count))
        vals.append(entry.vectors.ravel())
        offset += entry.count
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(offset, region.size),
    )


def solve_cem_basis(
    grid: GridHierarchy,
    stiffness: SparseOperator,
    aux: AuxiliaryBasis,
    element: int,
    m: int,
    free_sides: Sequence[str] = (),
) -> Dict[str, np.ndarray]:
    """Minimize a(phi, phi) on K_{i,m} subject to s(phi, nu) = s(psi_j^(i), nu).

    Constraints run over every auxiliary function inside K_{i,m}; phi
    vanishes on the boundary of K_{i,m} except on the domain sides in
    ``free_sides``, where the natural condition holds.

    Returns:
        dict with ``nodes`` (free region nodes) and ``values`` (one column per psi_j^(i))

    Raises:
        SingularSystemError: If the auxiliary constraints are rank deficient
    """
    elements = oversample(grid, element, m)
    region = region_free_nodes(grid, elements, free_sides)
    entries = [aux.entries[e] for e in elements]
    psi_rows = _local_rows(entries, region, grid.n_nodes)
    s_local = local_block(aux.s_mass.matrix, region)
    constraints = (psi_rows @ s_local).tocsr()

    own = int(np.searchsorted(elements, element))
    start = sum(entry.count for entry in entries[:own])
    count = aux.entries[element].count
    # s(psi_j^(i), psi_k) = delta_jk by s-orthonormality
    rhs = np.zeros((constraints.shape[0], count))
    rhs[start + np.arange(count), np.arange(count)] = 1.0

    a_local = local_block(stiffness.matrix, region)
    values = solve_saddle_point(a_local, constraints, rhs, f"CEM basis of element {element}")
    logger.debug(
        "CEM basis solved",
        extra={"element": element, "m": m, "region_nodes": int(region.size), "constraints": int(constraints.shape[0])},
    )
    return {"nodes": region, "values": values}


def solve_explicit_eigen(
    grid: GridHierarchy,
    stiffness: SparseOperator,
    mass: SparseOperator,
    aux: AuxiliaryBasis,
    element: int,
    n_modes: int,
) -> LocalEigenpairs:
    """Smallest eigenpairs of (kappa-stiffness, mass) on V(K_i) intersected with ker Pi.

    The constrained space is the null space of the local rows s_i(., psi_j^(i)).

    Raises:
        RankDeficiencyError: If the local constraint rows are rank deficient
        ValueError: If n_modes exceeds the constrained dimension
    """
    entry = aux.entries[element]
    nodes = entry.nodes
    s_local = local_block(aux.s_mass.matrix, nodes).toarray()
    constraint = entry.vectors.T @ s_local
    basis = null_space(constraint)
    expected = nodes.size - entry.count
    if basis.shape[1] != expected:
        raise RankDeficiencyError(
            f"element {element}: constraint null space has dimension {basis.shape[1]}, expected {expected}"
        )
    a_local = local_block(stiffness.matrix, nodes).toarray()
    m_local = local_block(mass.matrix, nodes).toarray()
    values, coeffs = smallest_eigenpairs(
        basis.T @ a_local @ basis,
        basis.T @ m_local @ basis,
        n_modes,
        f"explicit problem of element {element}",
    )
    vectors = fix_signs(basis @ coeffs)
    return LocalEigenpairs(element=element, nodes=nodes, eigenvalues=values, vectors=vectors)


def solve_explicit_basis(
    grid: GridHierarchy,
    stiffness: SparseOperator,
    mass: SparseOperator,
    aux: AuxiliaryBasis,
    explicit: List[LocalEigenpairs],
    element: int,
    m: int,
    free_sides: Sequence[str] = (),
) -> Dict[str, np.ndarray]:
    """Minimize a(zeta, zeta) on K_{i,m} with s(zeta, nu) = 0 and (zeta, nu) = (xi_j^(i), nu).

    Returns:
        dict with ``nodes`` and ``values`` (one column per xi_j^(i))
    """
    elements = oversample(grid, element, m)
    region = region_free_nodes(grid, elements, free_sides)
    psi_rows = _local_rows([aux.entries[e] for e in elements], region, grid.n_nodes)
    xi_entries = [explicit[e] for e in elements]
    xi_rows = _local_rows(xi_entries, region, grid.n_nodes)
    s_local = local_block(aux.s_mass.matrix, region)
    m_local = local_block(mass.matrix, region)
    xi_mass = (xi_rows @ m_local).tocsr()
    constraints = sp.vstack([psi_rows @ s_local, xi_mass], format="csr")

    own = int(np.searchsorted(elements, element))
    start = sum(entry.count for entry in xi_entries[:own])
    count = explicit[element].count
    target = xi_rows[start:start + count]
    rhs = np.zeros((constraints.shape[0], count))
    rhs[psi_rows.shape[0]:] = (xi_mass @ target.T).toarray()

    a_local = local_block(stiffness.matrix, region)
    values = solve_saddle_point(a_local, constraints, rhs, f"explicit basis of element {element}")
    logger.debug("Explicit basis solved", extra={"element": element, "m": m, "region_nodes": int(region.size)})
    return {"nodes": region, "values": values}
