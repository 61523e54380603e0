"""Grid, operator and boundary-condition types shared by every solver."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class GridHierarchy:
    """Nested coarse/fine structured square meshes on the unit square.

    Fine nodes are numbered row by row, ``node = j * (fine_n + 1) + i`` with
    ``i`` the x-index. Fine cells and coarse elements follow the same
    row-major convention, so a cellwise field stored as ``values[j, i]``
    flattens to cell order.
    """

    coarse_n: int
    refine: int
    coords: np.ndarray = field(repr=False)
    cell_nodes: np.ndarray = field(repr=False)
    element_nodes: List[np.ndarray] = field(repr=False)
    element_cells: List[np.ndarray] = field(repr=False)
    boundary: Dict[str, np.ndarray] = field(repr=False)

    @property
    def fine_n(self) -> int:
        return self.coarse_n * self.refine

    @property
    def h(self) -> float:
        """Fine side length."""
        return 1.0 / self.fine_n

    @property
    def H(self) -> float:
        """Coarse side length."""
        return 1.0 / self.coarse_n

    @property
    def n_nodes(self) -> int:
        return (self.fine_n + 1) ** 2

    @property
    def n_cells(self) -> int:
        return self.fine_n ** 2

    @property
    def n_elements(self) -> int:
        return self.coarse_n ** 2

    @property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_nodes, dtype=bool)
        for side_mask in self.boundary.values():
            mask |= side_mask
        return mask

    def node_index(self, i: int, j: int) -> int:
        return j * (self.fine_n + 1) + i

    def element_position(self, element: int) -> Tuple[int, int]:
        """(I, J) position of a coarse element, I along x."""
        return element % self.coarse_n, element // self.coarse_n

    def box_nodes(self, i0: int, i1: int, j0: int, j1: int, interior: bool = False) -> np.ndarray:
        """Fine nodes of the closed box [i0, i1] x [j0, j1] in fine indices.

        With ``interior`` only nodes strictly inside the box are returned.
        """
        if interior:
            i0, i1, j0, j1 = i0 + 1, i1 - 1, j0 + 1, j1 - 1
        if i1 < i0 or j1 < j0:
            return np.zeros(0, dtype=np.int64)
        ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
        return (jj * (self.fine_n + 1) + ii).ravel().astype(np.int64)

    def box_free_nodes(
        self, i0: int, i1: int, j0: int, j1: int, free_sides: Sequence[str] = ()
    ) -> np.ndarray:
        """Nodes of a box that stay free when it carries a zero trace.

        Nodes on the box boundary are dropped unless every box side they lie
        on is part of a domain side listed in ``free_sides``. With no free
        sides this is ``box_nodes(..., interior=True)``. Every fine cell
        touching a kept node lies inside the box.
        """
        n = self.fine_n
        ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
        ii, jj = ii.ravel(), jj.ravel()
        fixed = np.zeros(ii.shape, dtype=bool)
        for on_side, domain_side, side in (
            (ii == i0, i0 == 0, "left"),
            (ii == i1, i1 == n, "right"),
            (jj == j0, j0 == 0, "bottom"),
            (jj == j1, j1 == n, "top"),
        ):
            if not (domain_side and side in free_sides):
                fixed |= on_side
        return (jj[~fixed] * (n + 1) + ii[~fixed]).astype(np.int64)

    def element_box(self, element: int) -> Tuple[int, int, int, int]:
        I, J = self.element_position(element)
        r = self.refine
        return I * r, (I + 1) * r, J * r, (J + 1) * r

    def element_interior_nodes(self, element: int) -> np.ndarray:
        """Fine nodes strictly inside the open coarse element."""
        return self.box_nodes(*self.element_box(element), interior=True)

    def element_free_nodes(self, element: int, free_sides: Sequence[str] = ()) -> np.ndarray:
        """Interior nodes of the element plus its nodes on free domain sides."""
        return self.box_free_nodes(*self.element_box(element), free_sides)

    def mesh_sizes(self) -> Dict[str, float]:
        """Side lengths and element diagonals of both grids."""
        return {
            "H_side": self.H,
            "h_side": self.h,
            "H_diagonal": float(np.sqrt(2.0) * self.H),
            "h_diagonal": float(np.sqrt(2.0) * self.h),
        }

    def to_dict(self) -> Dict:
        return {
            "coarse_n": self.coarse_n,
            "refine": self.refine,
            "fine_n": self.fine_n,
            "n_nodes": self.n_nodes,
            "n_elements": self.n_elements,
            **self.mesh_sizes(),
        }


@dataclass(frozen=True)
class SparseOperator:
    """Assembled bilinear form on fine nodal coefficients."""

    matrix: sp.csr_matrix
    symmetric: bool
    name: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        return self.matrix @ other

    def quadratic(self, p: np.ndarray, q: np.ndarray) -> float:
        """Evaluate p^T A q."""
        return float(p @ (self.matrix @ q))


class BoundaryKind(str, Enum):
    """Boundary treatment of one variable."""

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    INFLOW = "inflow"


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary kind per variable: u and the auxiliary variables v_i."""

    u: BoundaryKind = BoundaryKind.NEUMANN
    v: BoundaryKind = BoundaryKind.NEUMANN

    @classmethod
    def from_names(cls, u: str, v: str) -> "BoundaryCondition":
        return cls(BoundaryKind(u), BoundaryKind(v))

    def to_dict(self) -> Dict[str, str]:
        return {"u": self.u.value, "v": self.v.value}
