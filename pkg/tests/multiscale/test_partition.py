"""Tests for the partition of unity, oversampling and the auxiliary problem."""

import numpy as np
import pytest
from scipy.linalg import eigh

from src.fem.assembly import assemble_mass, assemble_stiffness
from src.fem.grid import build_grids, cell_centers, coarse_node_indices
from src.models.fields import PermeabilityField
from src.multiscale.auxiliary import build_auxiliary_basis, solve_auxiliary_eigen
from src.multiscale.oversampling import oversample, region_box
from src.multiscale.partition import (
    auxiliary_weight,
    grad_chi_squared,
    partition_of_unity,
)


@pytest.fixture(scope="module")
def grid():
    return build_grids(4, 4)


def test_partition_sums_to_one(grid):
    """The hats add up to one at every fine node."""
    chi = partition_of_unity(grid)
    assert np.abs(np.asarray(chi.sum(axis=1)).ravel() - 1.0).max() < 1e-14


def test_hat_is_one_at_its_node(grid):
    """At a coarse node its own hat is 1 and all others vanish."""
    chi = partition_of_unity(grid).toarray()
    nodes = coarse_node_indices(grid)
    assert np.array_equal(chi[nodes], np.eye(nodes.size))


def test_hat_support_is_local(grid):
    """Each hat is supported on at most four coarse elements."""
    chi = partition_of_unity(grid)
    support = np.diff(chi.indptr)
    assert support.max() <= (2 * grid.refine + 1) ** 2


def test_grad_chi_squared_matches_hand_formula(grid):
    """Sum of |grad chi|^2 over element corners is 2((1-y)^2 + y^2 + (1-x)^2 + x^2)/H^2."""
    weight = grad_chi_squared(grid)
    centers = cell_centers(grid) / grid.H
    local = centers - np.floor(centers)
    x, y = local[:, 0], local[:, 1]
    expected = 2.0 * ((1 - y) ** 2 + y ** 2 + (1 - x) ** 2 + x ** 2) / grid.H ** 2
    assert np.allclose(weight, expected, rtol=1e-12)


def test_unknown_weight_choice(grid):
    with pytest.raises(ValueError):
        auxiliary_weight(grid, PermeabilityField.constant(grid.fine_n), "bogus")


@pytest.mark.parametrize("element, m, count", [(5, 1, 9), (0, 1, 4), (0, 4, 16), (5, 0, 1)])
def test_oversample_counts(grid, element, m, count):
    """Interior 3x3 block, corner 2x2 block, saturation and K_{i,0} = K_i."""
    elements = oversample(grid, element, m)
    assert elements.size == count
    assert element in elements


def test_oversample_monotone(grid):
    """K_{i,m-1} is contained in K_{i,m}."""
    previous = set()
    for m in range(4):
        current = set(oversample(grid, 6, m).tolist())
        assert previous <= current
        previous = current


def test_region_box_is_rectangle(grid):
    assert region_box(grid, oversample(grid, 5, 1)) == (0, 12, 0, 12)


def test_first_eigenvalue_constant_kappa():
    """With kappa H^-2 weight the first eigenvalue is H^2 times the Dirichlet eigenvalue, about 2 pi^2."""
    g = build_grids(3, 8)
    kappa = PermeabilityField.constant(g.fine_n)
    stiffness = assemble_stiffness(g, kappa)
    s_mass = assemble_mass(g, kappa.cellwise / g.H ** 2)
    entry = solve_auxiliary_eigen(g, 4, 1, stiffness, s_mass)

    nodes = g.element_interior_nodes(4)
    a = stiffness.matrix[nodes][:, nodes].toarray()
    m = assemble_mass(g).matrix[nodes][:, nodes].toarray()
    oracle = eigh(a, m, eigvals_only=True)[0]
    assert entry.eigenvalues[0] == pytest.approx(oracle * g.H ** 2, rel=1e-10)
    assert entry.eigenvalues[0] == pytest.approx(2 * np.pi ** 2, rel=0.03)


def test_auxiliary_orthonormal_and_local(grid):
    """psi are s-orthonormal, ascending and supported inside their element."""
    kappa = PermeabilityField(np.random.default_rng(2).uniform(1, 100, (grid.fine_n, grid.fine_n)))
    aux = build_auxiliary_basis(grid, kappa, 3)
    psi = aux.as_matrix()
    gram = (psi.T @ aux.s_mass.matrix @ psi).toarray()
    assert np.abs(gram - np.eye(aux.total)).max() < 1e-10
    for entry in aux.entries:
        assert np.all(np.diff(entry.eigenvalues) >= 0)
        inside = set(grid.element_interior_nodes(entry.element).tolist())
        assert set(entry.nodes.tolist()) <= inside


def test_eigenvalues_invariant_under_kappa_scaling(grid):
    """For constant kappa the kappa grad chi weight cancels kappa in the ratio."""
    first = build_auxiliary_basis(grid, PermeabilityField.constant(grid.fine_n, 1.0), 2)
    second = build_auxiliary_basis(grid, PermeabilityField.constant(grid.fine_n, 250.0), 2)
    for a, b in zip(first.entries, second.entries):
        assert np.allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10)


def test_auxiliary_deterministic(grid):
    """Repeated construction is bit-identical, signs included."""
    kappa = PermeabilityField.constant(grid.fine_n)
    first = build_auxiliary_basis(grid, kappa, 2)
    second = build_auxiliary_basis(grid, kappa, 2)
    for a, b in zip(first.entries, second.entries):
        assert np.array_equal(a.vectors, b.vectors)
        pivot = np.argmax(np.abs(a.vectors), axis=0)
        assert np.all(a.vectors[pivot, np.arange(a.count)] > 0)


def test_too_many_modes(grid):
    """Asking for more modes than interior nodes is rejected."""
    kappa = PermeabilityField.constant(grid.fine_n)
    with pytest.raises(ValueError, match="local dimension"):
        build_auxiliary_basis(grid, kappa, 10)
