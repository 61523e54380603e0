"""Multiscale space types: auxiliary spectral data, the V_H^1 + V_H^2 split and scheme constants."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from src.models.grid import SparseOperator


@dataclass(frozen=True)
class LocalEigenpairs:
    """Eigenpairs of one coarse element, supported on its free fine nodes."""

    element: int
    nodes: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return self.vectors.shape[1]


def _stack_columns(entries: Sequence[LocalEigenpairs], n_nodes: int) -> sp.csc_matrix:
    rows, cols, vals = [], [], []
    offset = 0
    for entry in entries:
        local_rows = np.repeat(entry.nodes, entry.count)
        local_cols = np.tile(np.arange(entry.count), len(entry.nodes)) + offset
        rows.append(local_rows)
        cols.append(local_cols)
        vals.append(entry.vectors.ravel())
        offset += entry.count
    if not rows:
        return sp.csc_matrix((n_nodes, 0))
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_nodes, offset),
    )


@dataclass(frozen=True)
class AuxiliaryBasis:
    """Local spectral functions psi_j^(i) of every coarse element with their s-weight."""

    entries: List[LocalEigenpairs]
    weight: np.ndarray = field(repr=False)
    weight_choice: str
    s_mass: SparseOperator = field(repr=False)
    n_nodes: int

    @property
    def total(self) -> int:
        return sum(entry.count for entry in self.entries)

    @property
    def offsets(self) -> np.ndarray:
        counts = [entry.count for entry in self.entries]
        return np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    def columns_of(self, elements: Sequence[int]) -> np.ndarray:
        """Global auxiliary column indices belonging to the given elements."""
        offsets = self.offsets
        return np.concatenate(
            [np.arange(offsets[e], offsets[e + 1]) for e in elements]
        ).astype(np.int64)

    def as_matrix(self) -> sp.csc_matrix:
        """Fine nodal columns of all psi_j^(i), element by element."""
        return _stack_columns(self.entries, self.n_nodes)


@dataclass(frozen=True)
class SpaceDecomposition:
    """Fine nodal columns of V_H^1 and V_H^2 with the data used to build and test them."""

    basis_v1: sp.csc_matrix = field(repr=False)
    basis_v2: sp.csc_matrix = field(repr=False)
    v1_labels: np.ndarray = field(repr=False)
    v2_labels: np.ndarray = field(repr=False)
    aux: AuxiliaryBasis = field(repr=False)
    explicit: List[LocalEigenpairs] = field(repr=False)
    oversampling: int
    gram: Dict[str, np.ndarray] = field(repr=False)
    # domain sides where the basis is not forced to zero
    free_sides: Tuple[str, ...] = ()

    @property
    def dim_v1(self) -> int:
        return self.basis_v1.shape[1]

    @property
    def dim_v2(self) -> int:
        return self.basis_v2.shape[1]

    @property
    def basis(self) -> sp.csc_matrix:
        """Columns of V_H = V_H^1 + V_H^2, V_H^1 first."""
        return sp.hstack([self.basis_v1, self.basis_v2], format="csc")

    def without_explicit(self) -> "SpaceDecomposition":
        """Same decomposition with an empty V_H^2."""
        n1 = self.dim_v1
        gram = {key: value for key, value in self.gram.items() if key.endswith("11")}
        gram.update({
            "M12": np.zeros((n1, 0)), "A12": np.zeros((n1, 0)),
            "M22": np.zeros((0, 0)), "A22": np.zeros((0, 0)),
        })
        return SpaceDecomposition(
            basis_v1=self.basis_v1,
            basis_v2=sp.csc_matrix((self.basis_v1.shape[0], 0)),
            v1_labels=self.v1_labels,
            v2_labels=np.zeros((0, 2), dtype=np.int64),
            aux=self.aux,
            explicit=[],
            oversampling=self.oversampling,
            gram=gram,
            free_sides=self.free_sides,
        )

    def to_dict(self) -> Dict:
        return {
            "dim_v1": self.dim_v1,
            "dim_v2": self.dim_v2,
            "oversampling": self.oversampling,
            "weight_choice": self.aux.weight_choice,
            "free_sides": ",".join(self.free_sides) or "none",
        }


@dataclass(frozen=True)
class SchemeConstants:
    """gamma of the V_H^1/V_H^2 angle and the stable step bound of the split scheme."""

    gamma: float
    dt_bound: float
    lambda_max: float
    beta: float
    gram_condition: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            "gamma": self.gamma,
            "dt_bound": self.dt_bound,
            "lambda_max": self.lambda_max,
            "beta": self.beta,
            "gram_condition": self.gram_condition,
        }
