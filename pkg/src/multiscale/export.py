"""Basis export and import in the CSV grid format.

Each basis column is written as a (fine_n+1) x (fine_n+1) nodal grid,
preceded by a comment line ``# space=v1; element=3; j=0; eigenvalue=...``.
"""

import re
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from src.fields.io import load_grids, save_grids
from src.models.grid import GridHierarchy
from src.models.spaces import SpaceDecomposition
from src.utils.errors import FieldFormatError
from src.utils.file_utils import safe_read_file

_LABEL = re.compile(r"#\s*space=(v1|v2);\s*element=(\d+);\s*j=(\d+);\s*eigenvalue=(\S+)")


def export_basis(
    decomposition: SpaceDecomposition,
    grid: GridHierarchy,
    path: Union[str, Path],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write every V_H^1 and V_H^2 column with its element, index and eigenvalue."""
    side = grid.fine_n + 1
    blocks, comments = [], []
    spaces = (
        ("v1", decomposition.basis_v1, decomposition.v1_labels, decomposition.aux.entries),
        ("v2", decomposition.basis_v2, decomposition.v2_labels, decomposition.explicit),
    )
    for name, basis, labels, entries in spaces:
        dense = basis.toarray()
        for col, (element, j) in enumerate(labels):
            eigenvalue = float(entries[element].eigenvalues[j])
            blocks.append(dense[:, col].reshape(side, side))
            comments.append(f"space={name}; element={element}; j={j}; eigenvalue={eigenvalue!r}")
    return save_grids(blocks, path, metadata=metadata, block_comments=comments)


def import_basis(path: Union[str, Path]) -> Dict[str, Tuple[sp.csc_matrix, np.ndarray, np.ndarray]]:
    """Read an exported basis.

    Returns:
        ``{"v1": (columns, labels, eigenvalues), "v2": ...}``
    """
    labels = [m.groups() for m in _LABEL.finditer(safe_read_file(path))]
    blocks = load_grids(path)
    if len(labels) != len(blocks):
        raise FieldFormatError(f"{path}: {len(blocks)} grids but {len(labels)} basis labels")
    result = {}
    for name in ("v1", "v2"):
        picked = [k for k, label in enumerate(labels) if label[0] == name]
        if picked:
            columns = np.column_stack([blocks[k].ravel() for k in picked])
        else:
            n_nodes = blocks[0].size if blocks else 0
            columns = np.zeros((n_nodes, 0))
        result[name] = (
            sp.csc_matrix(columns),
            np.array([[int(labels[k][1]), int(labels[k][2])] for k in picked], dtype=np.int64).reshape(-1, 2),
            np.array([float(labels[k][3]) for k in picked]),
        )
    return result
