"""Tests for boundary restriction and interpolation helpers."""

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from src.fem.assembly import assemble_mass, assemble_stiffness
from src.fem.boundary import (
    free_node_basis,
    free_sides,
    inflow_mask,
    inflow_sides,
    interpolate,
    product_sine,
    prolong,
    restrict_dirichlet,
)
from src.fem.grid import build_grids
from src.models.grid import BoundaryKind, SparseOperator


def test_identity_on_three_by_three_nodes():
    """Restricting the 9x9 identity leaves the single interior node."""
    g = build_grids(2, 1)
    op = SparseOperator(sp.identity(9, format="csr"), symmetric=True, name="identity")
    restricted = restrict_dirichlet(op, g)
    assert restricted.dim == 1


def test_restrict_then_prolong_zeroes_boundary():
    """Prolongation reinserts zeros on the boundary."""
    g = build_grids(3, 2)
    values = np.arange(g.n_nodes, dtype=float) + 1.0
    back = prolong(restrict_dirichlet(values, g), g)
    assert np.all(back[g.boundary_mask] == 0.0)
    assert np.array_equal(back[~g.boundary_mask], values[~g.boundary_mask])


def test_neumann_is_noop():
    """Neumann restriction returns its input unchanged."""
    g = build_grids(2, 2)
    values = np.ones(g.n_nodes)
    assert restrict_dirichlet(values, g, BoundaryKind.NEUMANN) is values


def test_restricted_residual_matches_interior_rows():
    """Reinserting zeros reproduces the interior residual of the full system."""
    g = build_grids(3, 3)
    stiffness = assemble_stiffness(g, np.ones(g.n_cells))
    rng = np.random.default_rng(3)
    x = rng.standard_normal(g.n_nodes - g.boundary_mask.sum())
    reduced = restrict_dirichlet(stiffness, g) @ x
    full = stiffness @ prolong(x, g)
    assert np.allclose(reduced, full[~g.boundary_mask], atol=1e-13)


def _poisson_error(coarse_n, refine):
    g = build_grids(coarse_n, refine)
    stiffness = restrict_dirichlet(assemble_stiffness(g, np.ones(g.n_cells)), g)
    mass = assemble_mass(g)
    exact = interpolate(g, product_sine)
    load = restrict_dirichlet(mass @ (2 * np.pi ** 2 * exact), g)
    solution = prolong(spsolve(stiffness.matrix.tocsc(), load), g)
    return np.abs(solution - exact).max()


def test_manufactured_poisson_second_order():
    """Halving h quarters the nodal error of the Dirichlet Poisson solve."""
    coarse = _poisson_error(4, 4)
    fine = _poisson_error(4, 8)
    assert 3.0 < coarse / fine < 5.0


def test_inflow_side_for_positive_x_velocity():
    """a~ = (0.05, 0) enters through the left side only."""
    assert inflow_sides((0.05, 0.0)) == ["left"]
    g = build_grids(2, 2)
    mask = inflow_mask(g, (0.05, 0.0))
    assert np.array_equal(mask, g.boundary["left"])


def test_free_node_basis_shape():
    """Inflow kind removes only the inflow nodes."""
    g = build_grids(2, 2)
    basis = free_node_basis(g, BoundaryKind.INFLOW, (0.05, 0.0))
    assert basis.shape == (g.n_nodes, g.n_nodes - (g.fine_n + 1))


def test_interpolate_product_sine():
    """The product sine vanishes on the boundary and peaks at the center."""
    g = build_grids(2, 2)
    values = interpolate(g, product_sine)
    assert np.abs(values[g.boundary_mask]).max() < 1e-15
    assert values[g.node_index(2, 2)] == pytest.approx(1.0)


@pytest.mark.parametrize(
    "kind, expected",
    [
        (BoundaryKind.DIRICHLET, ()),
        (BoundaryKind.NEUMANN, ("left", "right", "bottom", "top")),
        (BoundaryKind.INFLOW, ("right", "bottom", "top")),
    ],
)
def test_free_sides(kind, expected):
    assert free_sides(kind, (0.05, 0.0)) == expected
