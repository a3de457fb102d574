import math

import numpy as np
import pytest

from analytic_reference import SmoothStreamField, project_to_grid
from errors import MetadataMismatch, StencilOutOfRange
from flow_field import ConservedField, GridSpec
from gas_dynamics import FlowState
from truncation_postprocessor import (
    GridVector,
    InteriorMask,
    freestream_normalization,
    high_order_residual,
    resolve_variables,
    sixth_order_derivative,
    stencil_d1_sixth,
)


@pytest.mark.parametrize("degree", range(7))
def test_stencil_is_exact_for_low_degree_polynomials(degree):
    h = 0.1
    x = np.arange(11) * h
    values = x ** degree
    expected = degree * x[5] ** (degree - 1) if degree else 0.0
    assert stencil_d1_sixth(values, 5, h) == pytest.approx(expected, abs=1e-10)


def test_stencil_sixth_order_convergence():
    def error(h):
        x = 0.3 + (np.arange(7) - 3) * h
        return abs(stencil_d1_sixth(np.sin(x), 3, h) - math.cos(0.3))

    ratio = error(0.1) / error(0.05)
    assert 64.0 * 0.9 <= ratio <= 64.0 * 1.1


def test_stencil_out_of_range():
    with pytest.raises(StencilOutOfRange):
        stencil_d1_sixth(np.arange(10.0), 2, 1.0)
    with pytest.raises(StencilOutOfRange):
        stencil_d1_sixth(np.arange(10.0), 7, 1.0)
    with pytest.raises(StencilOutOfRange):
        sixth_order_derivative(np.arange(6.0), 1.0)


def test_array_derivative_matches_pointwise_stencil():
    h = 0.05
    f = np.exp(np.arange(20) * h)[:, None] * np.ones((1, 3))
    d = sixth_order_derivative(f, h, axis=0)
    assert d.shape == (14, 3)
    assert d[4, 1] == pytest.approx(stencil_d1_sixth(f[:, 1], 7, h), rel=1e-14)


def test_interior_mask():
    mask = InteriorMask(10, 12, 3)
    assert mask.shape == (4, 6)
    assert mask.count == 24
    i, j = mask.node_indices()
    assert (i[0], j[0]) == (3, 3)
    assert (i[1], j[1]) == (3, 4)
    with pytest.raises(ValueError):
        InteriorMask(10, 10, 5)


def test_resolve_variables():
    assert resolve_variables("all") == (0, 1, 2, 3)
    assert resolve_variables("density") == (0,)
    assert resolve_variables([0, 3]) == (0, 3)
    with pytest.raises(ValueError):
        resolve_variables([4])
    with pytest.raises(ValueError):
        resolve_variables("pressure")


def test_freestream_normalization():
    assert freestream_normalization() == (1.0, 1.0, 1.0, 1.0)
    assert freestream_normalization(2.0, 3.0) == (2.0, 6.0, 6.0, 18.0)


def test_grid_vector_layout_checks(vec):
    with pytest.raises(MetadataMismatch):
        GridVector(np.zeros(5), InteriorMask(8, 8, 3), (0,))
    with pytest.raises(MetadataMismatch):
        vec(1.0, 2.0).require_same_layout(vec(1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        vec(1.0, float("nan"))


def test_from_node_array_applies_mask_and_normalization():
    grid = GridSpec(10, 10)
    array = np.arange(400, dtype=np.float64).reshape(10, 10, 4)
    mask = InteriorMask.for_grid(grid, 3)
    v = GridVector.from_node_array(array, mask, (0, 3), (2.0, 1.0, 1.0, 4.0), grid)
    assert v.size == 16 * 2
    assert v.values[0] == array[3, 3, 0] / 2.0
    assert v.values[1] == array[3, 3, 3] / 4.0
    assert np.array_equal(v.to_node_array()[..., 0], array[3:7, 3:7, 0] / 2.0)


def test_uniform_field_has_zero_truncation_error():
    field = ConservedField.uniform(GridSpec(12, 12), FlowState.freestream(3.0))
    tau = high_order_residual(field)
    assert np.max(np.abs(tau.values)) < 1e-12


def test_smooth_exact_solution_has_small_residual():
    field = project_to_grid(SmoothStreamField(), GridSpec(41, 41))
    tau = high_order_residual(field)
    assert tau.size == 35 * 35 * 4
    assert np.max(np.abs(tau.values)) < 1e-6


def test_residual_margin_must_cover_stencil():
    field = ConservedField.uniform(GridSpec(12, 12), FlowState.freestream(3.0))
    with pytest.raises(StencilOutOfRange):
        high_order_residual(field, margin=2)


def test_residual_frame_and_csv(tmp_path):
    field = ConservedField.uniform(GridSpec(10, 10), FlowState.freestream(3.0))
    tau = high_order_residual(field, variables="density")
    frame = tau.to_frame()
    assert list(frame.columns) == ["i", "j", "variable", "value"]
    assert len(frame) == 16
    path = tmp_path / "tau" / "density.csv"
    tau.to_csv(str(path))
    assert path.read_text().startswith("i,j,variable,value")


def test_vtk_needs_grid(vec, tmp_path):
    with pytest.raises(MetadataMismatch):
        vec(1.0, 2.0).write_vtk(str(tmp_path / "v.vtk"))
