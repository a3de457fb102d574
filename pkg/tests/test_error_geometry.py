import math

import numpy as np
import pandas as pd
import pytest

from error_geometry import (
    alpha_beta_relation,
    angle_between,
    angle_summary,
    error_vector,
    inner_product,
    norm,
    pair_labels,
    pairwise_angles,
    solution_vector,
    write_matrix_csv,
    write_scatter_csv,
)
from errors import GridMismatch, MetadataMismatch, ZeroVector
from flow_field import ConservedField, GridSpec
from gas_dynamics import FlowState
from truncation_postprocessor import InteriorMask


def test_basic_angles(vec):
    assert angle_between(vec(1.0, 0.0), vec(0.0, 1.0)) == pytest.approx(90.0, abs=1e-12)
    assert angle_between(vec(1.0, 0.0), vec(1.0, 1.0)) == pytest.approx(45.0, abs=1e-12)
    assert angle_between(vec(2.0, 2.0), vec(1.0, 1.0)) == pytest.approx(0.0, abs=1e-6)
    assert angle_between(vec(1.0, -1.0), vec(-1.0, 1.0)) == pytest.approx(180.0, abs=1e-6)


def test_zero_vector_angle(vec):
    with pytest.raises(ZeroVector):
        angle_between(vec(0.0, 0.0), vec(1.0, 0.0))


def test_layout_mismatch(vec):
    with pytest.raises(MetadataMismatch):
        angle_between(vec(1.0, 0.0), vec(1.0, 0.0, 0.0))
    with pytest.raises(MetadataMismatch):
        inner_product(vec(1.0), vec(1.0, 2.0))


def test_centered_and_uncentered_angles_differ(vec):
    a, b = vec(1.0, 2.0, 3.0), vec(3.0, 2.0, 1.0)
    assert angle_between(a, b, centered=True) == pytest.approx(180.0, abs=1e-6)
    assert angle_between(a, b) == pytest.approx(math.degrees(math.acos(10.0 / 14.0)), abs=1e-10)
    assert angle_between(a, b) == pytest.approx(44.4, abs=0.05)


def test_error_vector_of_unit_perturbation():
    grid = GridSpec(8, 8)
    exact = ConservedField.uniform(grid, FlowState.freestream(2.0))
    numerical = exact.copy()
    numerical.data[3, 3, 0] += 1.0
    numerical.data[0, 0, 1] += 5.0  # 마스크 밖
    e = error_vector(numerical, exact)
    assert e.size == 2 * 2 * 4
    assert norm(e) == pytest.approx(1.0, abs=1e-15)
    assert norm(e, weighted=True) == pytest.approx(math.sqrt(grid.hx * grid.hy), rel=1e-14)

    density_only = error_vector(numerical, exact, variables="density")
    assert density_only.values.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_error_vector_grid_mismatch():
    a = ConservedField.uniform(GridSpec(8, 8), FlowState.freestream(2.0))
    b = ConservedField.uniform(GridSpec(8, 9), FlowState.freestream(2.0))
    with pytest.raises(GridMismatch):
        error_vector(a, b)
    with pytest.raises(GridMismatch):
        solution_vector(a, InteriorMask(9, 9, 3))


def test_pairwise_angles_symmetric(vec):
    vectors = [vec(1.0, 0.0, 0.0), vec(0.0, 1.0, 0.0), vec(1.0, 1.0, 0.0)]
    angles = pairwise_angles(vectors)
    assert np.array_equal(angles, angles.T)
    assert np.all(np.diag(angles) == 0.0)
    assert angles[0, 1] == pytest.approx(90.0)
    assert angles[0, 2] == pytest.approx(45.0)


def test_pairwise_angles_zero_vector_policy(vec):
    vectors = [vec(1.0, 0.0), vec(0.0, 0.0), vec(0.0, 1.0)]
    with pytest.raises(ZeroVector):
        pairwise_angles(vectors)
    angles = pairwise_angles(vectors, on_zero="nan")
    assert math.isnan(angles[0, 1]) and math.isnan(angles[1, 2])
    summary = angle_summary(angles)
    assert summary["pairs"] == 3
    assert summary["defined_pairs"] == 1
    assert summary["mean"] == pytest.approx(90.0)


def test_pairwise_angles_needs_two_vectors(vec):
    with pytest.raises(ValueError):
        pairwise_angles([vec(1.0, 0.0)])


def test_alpha_beta_relation():
    alpha = np.array([[0.0, 30.0, 10.0], [30.0, 0.0, 50.0], [10.0, 50.0, 0.0]])
    beta = np.array([[0.0, 60.0, 60.0], [60.0, 0.0, 40.0], [60.0, 40.0, 0.0]])
    relation = alpha_beta_relation(alpha, beta)
    assert relation["pairs"] == 3
    assert relation["alpha_ge_beta_over_3"] == pytest.approx(2.0 / 3.0)
    assert relation["beta_gt_alpha"] == pytest.approx(2.0 / 3.0)


def test_csv_outputs(tmp_path):
    alpha = np.array([[0.0, 30.0, 10.0], [30.0, 0.0, 50.0], [10.0, 50.0, 0.0]])
    beta = alpha * 2.0
    scatter = tmp_path / "scatter.csv"
    write_scatter_csv(str(scatter), alpha, beta)
    frame = pd.read_csv(scatter)
    assert list(frame.columns) == ["beta_deg", "alpha_deg"]
    assert len(frame) == 3
    assert frame["beta_deg"].tolist() == [60.0, 20.0, 100.0]

    matrix = tmp_path / "angles.csv"
    write_matrix_csv(str(matrix), alpha, ["a", "b", "c"])
    loaded = pd.read_csv(matrix, index_col="solution")
    assert loaded.loc["b", "c"] == 50.0
    assert pair_labels(["a", "b", "c"]) == [("a", "b"), ("a", "c"), ("b", "c")]
