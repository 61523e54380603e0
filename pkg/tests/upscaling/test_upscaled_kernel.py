"""Tests for interface nodes, kernel weights, averaged solutions and the stability check."""

import numpy as np
import pytest

from src.models.fields import PermeabilityField
from src.models.upscaling import LayeredMedium
from src.upscaling.io import load_medium, save_kernel, save_medium
from src.upscaling.kernel import (
    averaged_heaviside_solution,
    node_function,
    solve_interface_nodes,
    solve_kernel_weights,
    upscale,
)
from src.upscaling.stability import check_continuous_stability
from src.utils.errors import FieldFormatError, ResidualToleranceError
from src.utils.file_utils import read_csv_rows


def _random_medium(rng, n):
    widths = rng.uniform(0.05, 1.0, n)
    widths /= widths.sum()
    widths[-1] = 1.0 - widths[:-1].sum()
    velocities = -2.0 + np.cumsum(rng.uniform(0.05, 1.0, n))
    return LayeredMedium.from_layers(widths, velocities)


def test_two_layer_hand_solution():
    medium = LayeredMedium.from_layers([0.5, 0.5], [0.0, 1.0])
    kernel = upscale(medium)
    assert kernel.mean_velocity == pytest.approx(0.5)
    assert kernel.nodes == pytest.approx([0.5], abs=1e-13)
    assert kernel.weights == pytest.approx([0.25], abs=1e-12)
    assert kernel.variance == pytest.approx(0.25)


def test_symmetric_medium_has_symmetric_nodes():
    medium = LayeredMedium.from_layers([0.25, 0.5, 0.25], [-1.0, 0.0, 1.0])
    nodes = solve_interface_nodes(medium).copy()
    assert nodes[0] == pytest.approx(-nodes[1], abs=1e-13)


def test_equal_velocities_merge():
    medium = LayeredMedium.from_layers([0.2, 0.3, 0.5], [1.0, 1.0, 1.0])
    assert medium.n == 1
    kernel = upscale(medium)
    assert kernel.nodes.size == 0 and kernel.weights.size == 0
    assert kernel.variance == 0.0


def test_unsorted_layers_are_sorted_and_merged():
    medium = LayeredMedium.from_layers([0.1, 0.4, 0.2, 0.3], [2.0, -1.0, 2.0, 0.5])
    assert medium.velocities.tolist() == [-1.0, 0.5, 2.0]
    assert medium.widths == pytest.approx([0.4, 0.3, 0.3])


def test_widths_must_sum_to_one():
    with pytest.raises(ValueError, match="sum to 1"):
        LayeredMedium.from_layers([0.5, 0.6], [0.0, 1.0])


def test_random_media_structure():
    """Interlacing, node residuals and sum beta = var(a) over many random media."""
    rng = np.random.default_rng(2024)
    for trial in range(1000):
        medium = _random_medium(rng, 2 + trial % 5)
        kernel = upscale(medium)
        assert kernel.interlaced
        term_scale = np.abs(medium.widths / (kernel.nodes[:, None] - medium.velocities)).sum(axis=1)
        assert np.all(np.abs(kernel.node_residuals) <= 1e-10 * term_scale)
        assert kernel.weight_sum_gap <= 1e-10 * max(1.0, kernel.variance)


def test_translation_covariance():
    rng = np.random.default_rng(5)
    medium = _random_medium(rng, 5)
    shifted = LayeredMedium.from_layers(medium.widths, medium.velocities + 0.75)
    base, moved = upscale(medium), upscale(shifted)
    assert moved.mean_velocity == pytest.approx(base.mean_velocity + 0.75, abs=1e-12)
    assert moved.nodes == pytest.approx(base.nodes + 0.75, abs=1e-12)
    assert moved.weights == pytest.approx(base.weights, rel=1e-8, abs=1e-12)
    assert moved.variance == pytest.approx(base.variance, rel=1e-12)


def test_scaling_covariance():
    rng = np.random.default_rng(6)
    medium = _random_medium(rng, 4)
    scaled = LayeredMedium.from_layers(medium.widths, 3.0 * medium.velocities)
    base, big = upscale(medium), upscale(scaled)
    assert big.mean_velocity == pytest.approx(3.0 * base.mean_velocity, rel=1e-12, abs=1e-14)
    assert big.nodes == pytest.approx(3.0 * base.nodes, rel=1e-12, abs=1e-13)
    assert big.weights == pytest.approx(9.0 * base.weights, rel=1e-8, abs=1e-12)
    assert big.variance == pytest.approx(9.0 * base.variance, rel=1e-12)


def test_node_function_changes_sign_at_root():
    medium = LayeredMedium.from_layers([0.3, 0.7], [0.0, 2.0])
    root = solve_interface_nodes(medium)[0]
    assert node_function(medium, root - 1e-6) > 0 > node_function(medium, root + 1e-6)


def test_weights_flag_inaccurate_nodes():
    medium = LayeredMedium.from_layers([0.2, 0.3, 0.5], [0.0, 1.0, 2.0])
    nodes = solve_interface_nodes(medium).copy()
    # moving one node alone changes their sum, so the three equations become inconsistent
    nodes[0] *= 0.9
    with pytest.raises(ResidualToleranceError, match="residual"):
        solve_kernel_weights(medium, nodes)


@pytest.mark.parametrize("x, t, expected", [
    (0.3, 0.0, 1.0),
    (-0.3, 0.0, 0.0),
    (0.5, 1.0, 0.5),
    (5.0, 1.0, 1.0),
    (0.0, 1.0, 0.5),
])
def test_averaged_heaviside(x, t, expected):
    medium = LayeredMedium.from_layers([0.5, 0.5], [0.0, 1.0])
    assert averaged_heaviside_solution(medium, x, t) == pytest.approx(expected)


def test_averaged_heaviside_rejects_negative_time():
    medium = LayeredMedium.from_layers([1.0], [0.0])
    with pytest.raises(ValueError):
        averaged_heaviside_solution(medium, 0.0, -1.0)


def test_stability_constant_kappa():
    report = check_continuous_stability(PermeabilityField.constant(16, 3.0), (1.0, -2.0), 0.1)
    assert report.satisfied
    assert report.min_value == pytest.approx(0.3)


def test_stability_flags_fast_decrease():
    values = np.ones((8, 8))
    values[:, 4:] = 0.1
    report = check_continuous_stability(values, (1.0, 0.0), 1.0)
    assert (0, 3) in report.violations
    assert all(col == 3 for _, col in report.violations)


@pytest.mark.parametrize("beta, satisfied", [(2.2, True), (1.8, False)])
def test_stability_exponential_profile(beta, satisfied):
    """kappa = exp(-c x1) along a~ = (1, 0) is stable iff beta >= c."""
    n, c = 32, 2.0
    centers = (np.arange(n) + 0.5) / n
    values = np.tile(np.exp(-c * centers), (n, 1))
    report = check_continuous_stability(values, (1.0, 0.0), beta)
    assert report.satisfied is satisfied
    if not satisfied:
        assert len(report.violations) == n * n


def test_medium_and_kernel_files(tmp_path):
    medium = LayeredMedium.from_layers([0.25, 0.75], [0.0, 2.0])
    path = save_medium(medium, tmp_path / "medium.csv")
    loaded = load_medium(path)
    assert np.array_equal(loaded.widths, medium.widths)
    assert np.array_equal(loaded.velocities, medium.velocities)

    kernel_path = save_kernel(upscale(loaded), tmp_path / "kernel.csv", {"source": "medium.csv"})
    assert kernel_path.read_text().startswith("# a_bar=")
    rows = read_csv_rows(kernel_path)
    assert [row["i"] for row in rows] == ["1", "2"]
    assert float(rows[0]["beta"]) == pytest.approx(0.75, rel=1e-10)
    assert rows[1]["u"] == ""


def test_headerless_medium_file(tmp_path):
    path = tmp_path / "medium.csv"
    path.write_text("# layers\n0.5, 1.0\n0.5, 0.0\n")
    medium = load_medium(path)
    assert medium.velocities.tolist() == [0.0, 1.0]


def test_malformed_medium_file(tmp_path):
    path = tmp_path / "medium.csv"
    path.write_text("m,a\n0.5,1.0\n0.5,x\n")
    with pytest.raises(FieldFormatError, match="line 3"):
        load_medium(path)


def test_weights_match_residue_formula():
    """beta_i = 1 / sum_k m_k / (u_i - a_k)^2, the residues of 1 / f."""
    medium = _random_medium(np.random.default_rng(9), 6)
    kernel = upscale(medium)
    residues = 1.0 / (medium.widths / (kernel.nodes[:, None] - medium.velocities) ** 2).sum(axis=1)
    assert kernel.weights == pytest.approx(residues, rel=1e-8)
    assert not kernel.negative_weights
