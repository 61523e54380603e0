"""Local auxiliary spectral problems and the projection Pi."""

from typing import Optional, Sequence

import numpy as np

from src.fem.assembly import assemble_mass, assemble_stiffness
from src.models.fields import PermeabilityField
from src.models.grid import GridHierarchy, SparseOperator
from src.models.spaces import AuxiliaryBasis, LocalEigenpairs
from src.multiscale.local_solvers import local_block, smallest_eigenpairs
from src.multiscale.partition import auxiliary_weight
from src.utils.logging import logger


def solve_auxiliary_eigen(
    grid: GridHierarchy,
    element: int,
    n_modes: int,
    stiffness: SparseOperator,
    s_mass: SparseOperator,
    free_sides: Sequence[str] = (),
) -> LocalEigenpairs:
    """Smallest eigenpairs of (kappa-stiffness, s_i-mass) on the free nodes of K_i.

    Free nodes are the interior ones plus those on domain sides listed in
    ``free_sides``. Their rows of the global operators only couple cells of
    K_i, so the global matrices sliced to those nodes are the local ones.

    Raises:
        ValueError: If n_modes exceeds the interior node count
    """
    nodes = grid.element_free_nodes(element, free_sides)
    a = local_block(stiffness.matrix, nodes).toarray()
    s = local_block(s_mass.matrix, nodes).toarray()
    values, vectors = smallest_eigenpairs(a, s, n_modes, f"auxiliary problem of element {element}")
    logger.debug(
        "Auxiliary eigenpairs",
        extra={"element": element, "eigenvalues": values.tolist()},
    )
    return LocalEigenpairs(element=element, nodes=nodes, eigenvalues=values, vectors=vectors)


def build_auxiliary_basis(
    grid: GridHierarchy,
    kappa: PermeabilityField,
    n_modes: int,
    weight_choice: str = "kappa_grad_chi",
    stiffness: Optional[SparseOperator] = None,
    free_sides: Sequence[str] = (),
) -> AuxiliaryBasis:
    """Solve the auxiliary problem on every coarse element."""
    stiffness = stiffness or assemble_stiffness(grid, kappa)
    weight = auxiliary_weight(grid, kappa, weight_choice)
    s_mass = assemble_mass(grid, weight)
    entries = [
        solve_auxiliary_eigen(grid, element, n_modes, stiffness, s_mass, free_sides)
        for element in range(grid.n_elements)
    ]
    return AuxiliaryBasis(
        entries=entries,
        weight=weight,
        weight_choice=weight_choice,
        s_mass=s_mass,
        n_nodes=grid.n_nodes,
    )


def project_aux(aux: AuxiliaryBasis, vectors: np.ndarray) -> np.ndarray:
    """Coordinates of Pi v = sum_ij s_i(v, psi_j) psi_j for fine nodal vectors.

    The psi are s-orthonormal with disjoint supports, so the coordinates are
    Psi^T S v.
    """
    psi = aux.as_matrix()
    return np.asarray(psi.T @ (aux.s_mass.matrix @ vectors))
