"""Tests for foot points, history evaluation and the direct memory solver."""

import math

import numpy as np
import pytest
import scipy.sparse as sp

from src.fem.boundary import interpolate, product_sine
from src.fem.grid import build_grids
from src.memory.direct import (
    MemoryDirectSolver,
    compare_dememorized,
    run_memory_direct,
    step_memory_direct,
)
from src.memory.trajectory import evaluate_history, trajectory_foot
from src.models.fields import KernelSpec, PermeabilityField
from src.models.grid import BoundaryCondition, BoundaryKind, SparseOperator
from src.models.memory import FootPoint, HistoryBuffer
from src.models.state import SchemeConfig
from src.solvers.operators import FineOperators, build_operators, fine_space
from src.solvers.runner import run

DIRICHLET = BoundaryCondition(BoundaryKind.DIRICHLET, BoundaryKind.DIRICHLET)


@pytest.fixture(scope="module")
def grid():
    return build_grids(2, 4)


@pytest.fixture(scope="module")
def kernel(grid):
    return KernelSpec.single(PermeabilityField.constant(grid.fine_n), 1.0)


@pytest.fixture(scope="module")
def operators(grid, kernel):
    return build_operators(grid, kernel)


def test_foot_point_arithmetic():
    foot = trajectory_foot(np.array([0.5, 0.5]), t=0.1, s=0.05, velocity_tilde=(0.05, 0.0))
    assert np.allclose(foot.points, [[0.4975, 0.5]], rtol=0, atol=1e-15)
    assert not foot.any_outside


def test_foot_point_terminal_and_at_rest():
    x = np.random.default_rng(0).uniform(size=(10, 2))
    assert np.array_equal(trajectory_foot(x, 0.3, 0.3, (2.0, -1.0)).points, x)
    assert np.array_equal(trajectory_foot(x, 0.3, 0.0, (0.0, 0.0)).points, x)


def test_foot_point_rejects_future_time():
    with pytest.raises(ValueError, match="s <= t"):
        trajectory_foot(np.zeros(2), t=0.1, s=0.2, velocity_tilde=(1.0, 0.0))


def test_foot_point_flags_outside():
    foot = trajectory_foot(np.array([[0.01, 0.5], [0.9, 0.5]]), 1.0, 0.0, (0.1, 0.0))
    assert foot.outside.tolist() == [True, False]


def test_history_at_nodes_is_exact(grid):
    values = np.random.default_rng(1).standard_normal(grid.n_nodes)
    foot = FootPoint(points=grid.coords, outside=np.zeros(grid.n_nodes, dtype=bool))
    assert np.allclose(evaluate_history(grid, values, foot), values, rtol=0, atol=1e-14)


def test_history_outside_reads_zero(grid):
    foot = trajectory_foot(np.array([[0.02, 0.5]]), 1.0, 0.0, (0.5, 0.0))
    assert evaluate_history(grid, np.ones(grid.n_nodes), foot)[0] == 0.0


def test_history_at_cell_center_averages_corners(grid):
    values = interpolate(grid, lambda x, y: 1.0 + 2.0 * x - 3.0 * y + 5.0 * x * y)
    h = grid.h
    center = np.array([[2.5 * h, 3.5 * h]])
    foot = FootPoint(points=center, outside=np.array([False]))
    corners = [grid.node_index(i, j) for i, j in ((2, 3), (3, 3), (3, 4), (2, 4))]
    assert evaluate_history(grid, values, foot)[0] == pytest.approx(values[corners].mean(), rel=1e-14)


def test_one_step_memory_term_by_hand(grid, kernel, operators):
    """The first memory sum is dt exp(-beta dt) A u^0."""
    dt = 0.01
    config = SchemeConfig("implicit", dt, 1, kernel, bc=DIRICHLET)
    solver = MemoryDirectSolver(grid, operators, config)
    u0 = solver.space.prolong(solver.space.basis_u.T @ interpolate(grid, product_sine))
    history = HistoryBuffer(dt=dt, levels=[u0])
    expected = dt * math.exp(-dt) * (solver.space.basis_u.T @ (operators.stiffness[0].matrix @ u0))
    assert np.allclose(solver.memory_load(history), expected, rtol=1e-13, atol=0)

    u1 = step_memory_direct(history, solver)
    mass = solver.mass.toarray()
    by_hand = np.linalg.solve(mass, mass @ (solver.space.basis_u.T @ u0) - dt * expected)
    assert np.allclose(solver.space.basis_u.T @ u1, by_hand, rtol=1e-10)


def _without_diffusion(operators):
    zero = SparseOperator(matrix=sp.csr_matrix(operators.mass.matrix.shape), symmetric=True, name="zero")
    return FineOperators(
        mass=operators.mass,
        stiffness=[zero],
        convection=operators.convection,
        convection_tilde=operators.convection_tilde,
        betas=operators.betas,
    )


def test_no_diffusion_matches_dememorized(grid, kernel):
    """Without a kernel both solvers take the same explicit advection step."""
    ops = _without_diffusion(build_operators(grid, kernel, velocity=(1.0, 0.5), velocity_tilde=(1.0, 0.5)))
    config = SchemeConfig("implicit", 0.01, 8, kernel, velocity=(1.0, 0.5), velocity_tilde=(1.0, 0.5))
    u0 = interpolate(grid, product_sine)
    direct = run_memory_direct(grid, ops, config, u0).final
    dememorized = run(config, fine_space(grid, config.bc), ops, u0).snapshots[8]
    assert np.abs(direct - dememorized).max() <= 1e-12 * np.abs(dememorized).max()


def test_no_diffusion_keeps_constants(grid, kernel):
    ops = _without_diffusion(build_operators(grid, kernel, velocity=(0.3, -0.2)))
    config = SchemeConfig("implicit", 0.05, 5, kernel, velocity=(0.3, -0.2))
    final = run_memory_direct(grid, ops, config, np.full(grid.n_nodes, 2.0)).final
    assert np.allclose(final, 2.0, rtol=0, atol=1e-12)


def test_quadrature_tracks_auxiliary_variable(grid, kernel, operators):
    """At rest the history integral and the dememorized v agree to first order."""
    gaps = []
    for n_steps in (20, 40):
        dt = 0.2 / n_steps
        config = SchemeConfig("implicit", dt, n_steps, kernel, bc=DIRICHLET)
        space = fine_space(grid, DIRICHLET)
        result = run(config, space, operators, interpolate(grid, product_sine), keep_history=True)
        solver = MemoryDirectSolver(grid, operators, config)
        history = HistoryBuffer(dt=dt, levels=result.history[:-1])
        w = solver.history_integral(history, 1.0)
        v = space.basis_v @ result.final.v[0]
        gaps.append(np.linalg.norm(w - v) / np.linalg.norm(v))
    assert 1.6 <= gaps[0] / gaps[1] <= 2.4


@pytest.mark.parametrize("bc", [DIRICHLET, BoundaryCondition()], ids=["dirichlet", "neumann"])
def test_dememorization_converges_first_order(bc):
    """20x20 grid, a~ = 0, beta = 1: the terminal gap halves with the step."""
    g = build_grids(2, 10)
    kernel = KernelSpec.single(PermeabilityField.constant(g.fine_n), 1.0)
    ops = build_operators(g, kernel)
    config = SchemeConfig("implicit", 4e-3, 1, kernel, bc=bc)
    report = compare_dememorized(
        g, ops, config, dts=[4e-3, 2e-3, 1e-3], T=0.2, u0=interpolate(g, product_sine)
    )
    assert report.gaps[0] > report.gaps[1] > report.gaps[2]
    for g0, g1 in zip(report.gaps, report.gaps[1:]):
        assert 1.6 <= g0 / g1 <= 2.4
    assert report.observed_order == pytest.approx(1.0, abs=0.3)


def test_comparison_rejects_large_grids(kernel):
    big = build_grids(3, 14)
    ops = build_operators(big, KernelSpec.single(PermeabilityField.constant(big.fine_n), 1.0))
    config = SchemeConfig("implicit", 0.01, 1, KernelSpec.single(PermeabilityField.constant(big.fine_n), 1.0))
    with pytest.raises(ValueError, match="fine_n"):
        compare_dememorized(big, ops, config, dts=[0.01], T=0.1)
