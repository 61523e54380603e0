"""The angle constant gamma and the stable step bound of the split scheme."""

from typing import Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, cholesky, eigh, solve_triangular, svdvals

from src.models.grid import SparseOperator
from src.models.spaces import SchemeConstants, SpaceDecomposition
from src.utils.errors import RankDeficiencyError
from src.utils.logging import logger
from src.utils.validation_utils import validate_in_range, validate_positive

GRAM_CONDITION_LIMIT = 1e13


def gram(basis: sp.spmatrix, operator: SparseOperator, other: sp.spmatrix = None) -> np.ndarray:
    """Dense B^T A C (C defaults to B)."""
    other = basis if other is None else other
    product = basis.T @ (operator.matrix @ other)
    return product.toarray() if sp.issparse(product) else np.asarray(product)


def _cholesky_lower(matrix: np.ndarray, label: str) -> Tuple[np.ndarray, float]:
    condition = float(np.linalg.cond(matrix))
    if not np.isfinite(condition) or condition > GRAM_CONDITION_LIMIT:
        logger.error(f"{label} Gram matrix is rank deficient", extra={"condition": condition})
        raise RankDeficiencyError(f"{label} Gram matrix is rank deficient (condition {condition:.3e})", condition)
    try:
        return cholesky(matrix, lower=True), condition
    except LinAlgError as e:
        raise RankDeficiencyError(f"{label} Gram matrix is not positive definite: {e}", condition) from e


def compute_gamma(
    basis_v1: sp.spmatrix,
    basis_v2: sp.spmatrix,
    mass: SparseOperator,
    tol: float = 1e-10,
) -> Tuple[float, float]:
    """Cosine of the smallest L2 angle between span(B1) and span(B2).

    gamma is the largest singular value of L1^{-1} (B1^T M B2) L2^{-T}
    with L1 L1^T and L2 L2^T the Cholesky factors of the Gram matrices.

    Returns:
        (gamma, worst Gram condition number)

    Raises:
        RankDeficiencyError: If a Gram matrix is singular or the spaces intersect
    """
    if basis_v1.shape[1] == 0 or basis_v2.shape[1] == 0:
        raise ValueError("compute_gamma needs two nonempty bases")
    l1, cond1 = _cholesky_lower(gram(basis_v1, mass), "V_H^1")
    l2, cond2 = _cholesky_lower(gram(basis_v2, mass), "V_H^2")
    cross = gram(basis_v1, mass, basis_v2)
    scaled = solve_triangular(l1, cross, lower=True)
    scaled = solve_triangular(l2, scaled.T, lower=True).T
    gamma = float(svdvals(scaled)[0])
    condition = max(cond1, cond2)
    if gamma >= 1.0 - tol:
        logger.error("Spaces are not a direct sum", extra={"gamma": gamma})
        raise RankDeficiencyError(f"gamma = {gamma!r}: V_H^1 and V_H^2 intersect", condition)
    return gamma, condition


def compute_dt_bound(
    basis_v2: sp.spmatrix,
    beta: float,
    gamma: float,
    stiffness: SparseOperator,
    mass: SparseOperator,
) -> Tuple[float, float]:
    """beta (1 - gamma) / lambda_max of (B2^T A B2, B2^T M B2).

    Returns:
        (dt bound, lambda_max)

    Raises:
        ValueError: If gamma is not in [0, 1) or V_H^2 carries no energy
    """
    validate_positive(beta, "beta")
    validate_in_range(gamma, 0.0, None, "gamma")
    if gamma >= 1.0:
        raise ValueError(f"gamma must be < 1, got {gamma}")
    n2 = basis_v2.shape[1]
    if n2 == 0:
        raise ValueError("V_H^2 is empty; the step bound is undefined")
    a2 = gram(basis_v2, stiffness)
    m2 = gram(basis_v2, mass)
    lambda_max = float(eigh(a2, m2, eigvals_only=True, subset_by_index=[n2 - 1, n2 - 1])[0])
    if lambda_max <= 0:
        raise ValueError("V_H^2 has zero energy; the step bound is undefined")
    return beta * (1.0 - gamma) / lambda_max, lambda_max


def scheme_constants(
    decomposition: SpaceDecomposition,
    stiffness: SparseOperator,
    mass: SparseOperator,
    beta: float,
) -> SchemeConstants:
    """gamma and the step bound of a decomposition."""
    gamma, condition = compute_gamma(decomposition.basis_v1, decomposition.basis_v2, mass)
    dt_bound, lambda_max = compute_dt_bound(decomposition.basis_v2, beta, gamma, stiffness, mass)
    constants = SchemeConstants(
        gamma=gamma, dt_bound=dt_bound, lambda_max=lambda_max, beta=beta, gram_condition=condition
    )
    logger.info("Scheme constants", extra=constants.to_dict())
    return constants
