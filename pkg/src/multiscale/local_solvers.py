"""Dense and sparse building blocks shared by the local basis problems."""

from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, eigh
from scipy.sparse.linalg import splu

from src.utils.errors import SingularSystemError
from src.utils.logging import logger


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the entry of largest magnitude is positive.

    Ties go to the lowest index since argmax returns the first maximum.
    """
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def local_block(matrix: sp.spmatrix, rows: np.ndarray, cols: Optional[np.ndarray] = None) -> sp.csc_matrix:
    cols = rows if cols is None else cols
    return matrix.tocsr()[rows][:, cols].tocsc()


def smallest_eigenpairs(a: np.ndarray, b: np.ndarray, count: int, label: str):
    """Ascending generalized eigenpairs (a, b), b-orthonormal, sign-normalized.

    Raises:
        ValueError: If more pairs are requested than the problem has
        SingularSystemError: If the dense solver fails
    """
    dim = a.shape[0]
    if count < 1 or count > dim:
        raise ValueError(f"{label}: requested {count} eigenpairs but the local dimension is {dim}")
    try:
        values, vectors = eigh(a, b, subset_by_index=[0, count - 1])
    except LinAlgError as e:
        logger.error(f"{label}: eigen-solve failed", extra={"error": str(e)})
        raise SingularSystemError(f"{label}: eigen-solve did not converge: {e}") from e
    return values, fix_signs(vectors)


def solve_saddle_point(
    primal: sp.spmatrix,
    constraints: sp.spmatrix,
    constraint_rhs: np.ndarray,
    label: str,
) -> np.ndarray:
    """Solve [[A, B^T], [B, 0]] [x; mu] = [0; c] for every column of c.

    Returns:
        x with one column per right-hand side

    Raises:
        SingularSystemError: If the saddle matrix cannot be factorized
    """
    n = primal.shape[0]
    k = constraints.shape[0]
    kkt = sp.bmat([[primal, constraints.T], [constraints, None]], format="csc")
    rhs = np.zeros((n + k, constraint_rhs.shape[1]))
    rhs[n:] = constraint_rhs
    try:
        lu = splu(kkt)
    except RuntimeError as e:
        logger.error(f"{label}: singular saddle system", extra={"n": n, "constraints": k})
        raise SingularSystemError(f"{label}: singular saddle system ({e})") from e
    solution = lu.solve(rhs)
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError(f"{label}: saddle solve produced non-finite values")
    return solution[:n]
