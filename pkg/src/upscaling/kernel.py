"""Upscaled memory kernel of a layered transport medium.

For layers of width m_k moving with velocity a_k the averaged solution obeys
a transport equation with mean velocity a_bar and a memory kernel
sum_i beta_i exp(-u_i (t - s)). The nodes u_i are the roots of
f(u) = sum_k m_k / (u - a_k), one between each pair of neighbouring
velocities, and the weights solve sum_i beta_i / (u_i - a_k) = a_bar - a_k.
"""

from typing import Sequence, Tuple, Union

import numpy as np
from scipy.optimize import bisect

from src.models.upscaling import LayeredMedium, UpscaledKernel
from src.utils.errors import ResidualToleranceError
from src.utils.logging import logger

NODE_XTOL = 1e-15
WEIGHT_TOLERANCE = 1e-9


def node_function(medium: LayeredMedium, u: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """f(u) = sum_k m_k / (u - a_k)."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        terms = medium.widths / (u[..., None] - medium.velocities)
    return terms.sum(axis=-1)


def solve_interface_nodes(medium: LayeredMedium) -> np.ndarray:
    """One root of f in every open interval (a_i, a_{i+1}) by bisection."""
    a = medium.velocities
    nodes = np.empty(medium.n - 1)
    for i in range(medium.n - 1):
        lo = np.nextafter(a[i], a[i + 1])
        hi = np.nextafter(a[i + 1], a[i])
        nodes[i] = bisect(
            lambda u: float(node_function(medium, u)),
            lo, hi, xtol=NODE_XTOL, rtol=4 * np.finfo(float).eps, maxiter=400,
        )
    return nodes


def weight_system(medium: LayeredMedium, nodes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Matrix 1 / (u_i - a_k) with rows k and right-hand side a_bar - a_k."""
    matrix = 1.0 / (nodes[None, :] - medium.velocities[:, None])
    return matrix, medium.mean_velocity - medium.velocities


def solve_kernel_weights(medium: LayeredMedium, nodes: np.ndarray) -> Tuple[float, np.ndarray, float]:
    """Least-squares weights of the n-equation system.

    Returns:
        (a_bar, weights, relative residual)

    Raises:
        ResidualToleranceError: If the system is not met to WEIGHT_TOLERANCE
    """
    a_bar = medium.mean_velocity
    if nodes.size == 0:
        return a_bar, np.zeros(0), 0.0
    matrix, rhs = weight_system(medium, nodes)
    weights, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    scale = np.abs(rhs).max()
    residual = float(np.abs(matrix @ weights - rhs).max() / scale) if scale > 0 else 0.0
    if residual > WEIGHT_TOLERANCE:
        logger.error("Kernel weights miss their equations", extra={"residual": residual, "n": medium.n})
        raise ResidualToleranceError(f"kernel weight residual {residual:.3e} exceeds {WEIGHT_TOLERANCE}")
    if np.any(weights < 0):
        logger.warning("Negative kernel weights", extra={"weights": weights.tolist()})
    return a_bar, weights, residual


def upscale(medium: LayeredMedium) -> UpscaledKernel:
    """Mean velocity, nodes, weights and their residuals for a medium."""
    nodes = solve_interface_nodes(medium)
    a_bar, weights, residual = solve_kernel_weights(medium, nodes)
    kernel = UpscaledKernel(
        mean_velocity=a_bar,
        velocities=medium.velocities,
        nodes=nodes,
        weights=weights,
        variance=medium.variance,
        node_residuals=np.atleast_1d(node_function(medium, nodes)) if nodes.size else np.zeros(0),
        weight_residual=residual,
    )
    logger.debug("Upscaled kernel", extra=kernel.to_dict())
    return kernel


def averaged_heaviside_solution(
    medium: LayeredMedium,
    x: Union[float, Sequence[float], np.ndarray],
    t: float,
) -> np.ndarray:
    """sum_i m_i H(x - a_i t) with H(0) = 1."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    x = np.asarray(x, dtype=float)
    steps = np.heaviside(x[..., None] - medium.velocities * t, 1.0)
    return steps @ medium.widths
