"""Fine operator bundles and the ansatz spaces the schemes run in."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from src.fem.assembly import assemble_convection, assemble_mass, assemble_stiffness
from src.fem.boundary import free_node_basis
from src.models.fields import KernelSpec
from src.models.grid import BoundaryCondition, GridHierarchy, SparseOperator
from src.models.spaces import SpaceDecomposition
from src.multiscale.builder import inflow_augmentation


@dataclass(frozen=True)
class FineOperators:
    """Mass, per-term stiffness and both convection operators on fine nodes."""

    mass: SparseOperator
    stiffness: List[SparseOperator]
    convection: SparseOperator
    convection_tilde: SparseOperator
    betas: List[float]

    @property
    def M(self) -> int:
        return len(self.stiffness)

    @property
    def n_nodes(self) -> int:
        return self.mass.dim


def build_operators(
    grid: GridHierarchy,
    kernel: KernelSpec,
    velocity: Sequence[float] = (0.0, 0.0),
    velocity_tilde: Sequence[float] = (0.0, 0.0),
) -> FineOperators:
    return FineOperators(
        mass=assemble_mass(grid),
        stiffness=[assemble_stiffness(grid, term.field) for term in kernel.terms],
        convection=assemble_convection(grid, velocity, "convection"),
        convection_tilde=assemble_convection(grid, velocity_tilde, "convection_tilde"),
        betas=list(kernel.betas),
    )


@dataclass(frozen=True)
class AnsatzSpace:
    """Fine nodal columns of the u-space V and the v-space W.

    ``dim_v1`` marks the first block of a V_H^1 + V_H^2 split; W equals V
    whenever the split is used.
    """

    name: str
    basis_u: sp.csc_matrix = field(repr=False)
    basis_v: sp.csc_matrix = field(repr=False)
    dim_v1: Optional[int] = None

    @property
    def dim_u(self) -> int:
        return self.basis_u.shape[1]

    @property
    def dim_v(self) -> int:
        return self.basis_v.shape[1]

    @property
    def is_split(self) -> bool:
        return self.dim_v1 is not None

    def prolong(self, coeffs: np.ndarray) -> np.ndarray:
        """Fine nodal values of u-space coefficients."""
        return np.asarray(self.basis_u @ coeffs)


def fine_space(grid: GridHierarchy, bc: BoundaryCondition, velocity_tilde: Sequence[float] = (0.0, 0.0)) -> AnsatzSpace:
    """Q1 space on the free fine nodes of each variable."""
    return AnsatzSpace(
        name="fine",
        basis_u=free_node_basis(grid, bc.u, velocity_tilde),
        basis_v=free_node_basis(grid, bc.v, velocity_tilde),
    )


def multiscale_space(
    decomposition: SpaceDecomposition,
    which: str = "vh",
    grid: Optional[GridHierarchy] = None,
    augment_inflow: bool = False,
    velocity_tilde: Sequence[float] = (0.0, 0.0),
) -> AnsatzSpace:
    """V_H^1 alone (``v1``) or V_H^1 + V_H^2 (``vh``); W optionally adds inflow hats."""
    if which not in ("v1", "vh"):
        raise ValueError(f"unknown multiscale space {which!r}")
    basis = decomposition.basis_v1 if which == "v1" else decomposition.basis
    basis_v = basis
    if augment_inflow:
        if grid is None:
            raise ValueError("inflow augmentation needs the grid")
        basis_v = inflow_augmentation(grid, basis, velocity_tilde)
    return AnsatzSpace(
        name=which,
        basis_u=sp.csc_matrix(basis),
        basis_v=sp.csc_matrix(basis_v),
        dim_v1=decomposition.dim_v1 if not augment_inflow else None,
    )


@dataclass(frozen=True)
class GalerkinOperators:
    """Operators of a scheme projected onto an ansatz space.

    Rows of ``*_uu`` and ``stiffness_uv`` are tested with V; rows of
    ``*_vv`` and ``mass_vu`` with W.
    """

    mass_uu: sp.csr_matrix
    mass_vv: sp.csr_matrix
    mass_vu: sp.csr_matrix
    convection_uu: sp.csr_matrix
    convection_vv: sp.csr_matrix
    stiffness_uv: List[sp.csr_matrix]
    stiffness_vv: List[sp.csr_matrix]
    betas: List[float]

    @property
    def M(self) -> int:
        return len(self.stiffness_uv)


def _project(basis_left: sp.spmatrix, op: SparseOperator, basis_right: sp.spmatrix) -> sp.csr_matrix:
    return sp.csr_matrix(basis_left.T @ (op.matrix @ basis_right))


def galerkin(space: AnsatzSpace, ops: FineOperators) -> GalerkinOperators:
    B, W = space.basis_u, space.basis_v
    return GalerkinOperators(
        mass_uu=_project(B, ops.mass, B),
        mass_vv=_project(W, ops.mass, W),
        mass_vu=_project(W, ops.mass, B),
        convection_uu=_project(B, ops.convection, B),
        convection_vv=_project(W, ops.convection_tilde, W),
        stiffness_uv=[_project(B, a, W) for a in ops.stiffness],
        stiffness_vv=[_project(W, a, W) for a in ops.stiffness],
        betas=list(ops.betas),
    )


def source_load(space: AnsatzSpace, ops: FineOperators, source: Optional[np.ndarray]) -> np.ndarray:
    """V-tested load (g0, psi) of a fine nodal source; zeros without a source."""
    if source is None:
        return np.zeros(space.dim_u)
    return np.asarray(space.basis_u.T @ (ops.mass @ np.asarray(source, dtype=float)))
