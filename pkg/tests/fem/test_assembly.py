"""Tests for Q1 operator assembly."""

from fractions import Fraction

import numpy as np
import pytest

from src.fem.assembly import (
    assemble_convection,
    assemble_mass,
    assemble_stiffness,
    local_mass,
    local_stiffness,
)
from src.fem.boundary import interpolate
from src.fem.grid import build_grids
from src.models.fields import PermeabilityField


@pytest.fixture
def grid():
    return build_grids(3, 3)


@pytest.fixture
def rough_kappa(grid):
    rng = np.random.default_rng(7)
    return PermeabilityField(10.0 ** rng.uniform(0, 4, size=(grid.fine_n, grid.fine_n)))


def _fraction_matrix(rows):
    return np.array([[float(Fraction(v)) for v in row] for row in rows])


def test_local_mass_matches_exact_integrals():
    """2x2 Gauss reproduces the exact bilinear product integrals."""
    h = 0.25
    exact = h * h * _fraction_matrix([
        ["4/36", "2/36", "1/36", "2/36"],
        ["2/36", "4/36", "2/36", "1/36"],
        ["1/36", "2/36", "4/36", "2/36"],
        ["2/36", "1/36", "2/36", "4/36"],
    ])
    assert np.allclose(local_mass(h), exact, rtol=0, atol=1e-16)


def test_local_stiffness_matches_exact_integrals():
    """Element stiffness equals the exact Q1 gradient integrals."""
    exact = _fraction_matrix([
        ["4/6", "-1/6", "-2/6", "-1/6"],
        ["-1/6", "4/6", "-1/6", "-2/6"],
        ["-2/6", "-1/6", "4/6", "-1/6"],
        ["-1/6", "-2/6", "-1/6", "4/6"],
    ])
    assert np.allclose(local_stiffness(), exact, rtol=0, atol=1e-15)


def test_unit_mass_total(grid):
    """1^T M 1 equals the area of the unit square."""
    mass = assemble_mass(grid)
    ones = np.ones(grid.n_nodes)
    assert abs(mass.quadratic(ones, ones) - 1.0) < 1e-12


def test_mass_linear_in_weight(grid):
    """Constant weight c scales the unit-weight operator by c."""
    unit = assemble_mass(grid).matrix
    scaled = assemble_mass(grid, 3.5).matrix
    assert abs(scaled - 3.5 * unit).max() < 1e-15


def test_center_node_mass_on_two_by_two_grid():
    """Center node diagonal is 4 * h^2/9 with h = 1/2."""
    g = build_grids(2, 1)
    mass = assemble_mass(g).matrix
    center = g.node_index(1, 1)
    assert abs(mass[center, center] - 4 * (0.25 / 9)) < 1e-16


def test_mass_positive_definite(grid):
    """The unit mass matrix is symmetric positive definite."""
    dense = assemble_mass(grid).matrix.toarray()
    assert np.linalg.eigvalsh(dense).min() > 0


def test_stiffness_annihilates_constants(grid, rough_kappa):
    """A 1 = 0 for any kappa."""
    stiffness = assemble_stiffness(grid, rough_kappa)
    residual = stiffness @ np.ones(grid.n_nodes)
    assert np.abs(residual).max() < 1e-12 * rough_kappa.values.max()


def test_stiffness_energy_of_linear_function(grid):
    """int |grad x1|^2 = 1 is reproduced exactly."""
    stiffness = assemble_stiffness(grid, PermeabilityField.constant(grid.fine_n))
    u = interpolate(grid, lambda x, y: x)
    assert abs(stiffness.quadratic(u, u) - 1.0) < 1e-10


def test_stiffness_scales_with_one_cell(grid):
    """Scaling kappa on one cell scales the energy of a function supported there."""
    values = np.ones((grid.fine_n, grid.fine_n))
    base = assemble_stiffness(grid, values)
    values[4, 4] = 1e4
    boosted = assemble_stiffness(grid, values)
    u = np.zeros(grid.n_nodes)
    u[grid.cell_nodes[4 * grid.fine_n + 4, 0]] = 1.0
    cell_energy = local_stiffness()[0, 0]
    assert np.isclose(boosted.quadratic(u, u) - base.quadratic(u, u), (1e4 - 1) * cell_energy)


def test_symmetry_is_exact(grid, rough_kappa):
    """Symmetric operators equal their transposes bit for bit."""
    for op in (assemble_mass(grid, rough_kappa), assemble_stiffness(grid, rough_kappa)):
        assert (op.matrix != op.matrix.T).nnz == 0


def test_bilinear_forms_symmetric_on_vectors(grid, rough_kappa):
    """p^T A q = q^T A p within 1e-13 relative."""
    rng = np.random.default_rng(1)
    p, q = rng.standard_normal((2, grid.n_nodes))
    stiffness = assemble_stiffness(grid, rough_kappa)
    a, b = stiffness.quadratic(p, q), stiffness.quadratic(q, p)
    assert abs(a - b) <= 1e-13 * max(abs(a), 1.0)


def test_assembly_deterministic(grid, rough_kappa):
    """Two assemblies of the same input are bit-identical."""
    first = assemble_stiffness(grid, rough_kappa).matrix
    second = assemble_stiffness(grid, rough_kappa).matrix
    assert np.array_equal(first.data, second.data)
    assert np.array_equal(first.indices, second.indices)


def test_nonpositive_weight_rejected(grid):
    """A zero cell is reported with its coordinates."""
    values = np.ones((grid.fine_n, grid.fine_n))
    values[2, 5] = 0.0
    with pytest.raises(ValueError, match=r"row=2, col=5"):
        assemble_stiffness(grid, values)


def test_zero_velocity_gives_zero_operator(grid):
    """Convection with a = 0 vanishes."""
    assert assemble_convection(grid, (0.0, 0.0)).matrix.nnz == 0


def test_convection_of_constant_vanishes(grid):
    """C u = 0 for constant u."""
    conv = assemble_convection(grid, (1.0, 0.0))
    assert np.abs(conv @ np.ones(grid.n_nodes)).max() < 1e-14


def test_convection_one_cell_oracle():
    """Single-cell entries int N_a d/dx N_b match exact fractions."""
    g = build_grids(2, 1)
    h = g.h
    conv = assemble_convection(g, (1.0, 0.0)).matrix.toarray()
    nodes = g.cell_nodes[0]
    # sign of d/dx N_b and which horizontal edge each corner lies on
    sign = [-1, 1, 1, -1]
    edge = [0, 0, 1, 1]
    # the domain corner node only touches cell 0
    p = nodes[0]
    for b in range(4):
        overlap = Fraction(1, 3) if edge[0] == edge[b] else Fraction(1, 6)
        expected = h * sign[b] * float(Fraction(1, 2) * overlap)
        assert abs(conv[p, nodes[b]] - expected) < 1e-16


def test_convection_skew_in_interior():
    """C + C^T vanishes on rows of interior nodes for constant velocity."""
    g = build_grids(4, 2)
    conv = assemble_convection(g, (0.3, -0.2)).matrix
    sym = (conv + conv.T).toarray()
    interior = np.flatnonzero(~g.boundary_mask)
    assert np.abs(sym[np.ix_(interior, interior)]).max() < 1e-15
