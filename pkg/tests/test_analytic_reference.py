import json

import numpy as np
import pytest

from analytic_reference import (
    AnalyticField,
    Region,
    SmoothStreamField,
    analytic_invariants,
    build_case,
    build_edney6,
    build_oblique_case,
    project_to_grid,
)
from errors import DetachedShock, NoRegularSolution
from flow_field import GridSpec
from gas_dynamics import FlowState


def _assert_matched(reference):
    invariants = analytic_invariants(reference)
    assert invariants["max_shock_residual"] < 1e-10
    assert invariants["max_slip_pressure_residual"] < 1e-10
    assert invariants["max_slip_angle_residual_rad"] < 1e-10
    assert invariants["entropy_nondecreasing"]


def test_edney1_matching(edney1):
    _assert_matched(edney1)
    assert len(edney1.uniform_states()) == 5
    kinds = [d.kind for d in edney1.discontinuities]
    assert kinds.count("slip") == 1
    assert kinds[:2] == ["shock", "shock"]


def test_edney1_regions_by_position(edney1):
    cx, cy = edney1.interaction_point
    assert edney1.region_of(cx - 0.45, cy) == "freestream"
    assert edney1.region_of(cx - 0.05, cy - 0.3) == "post_lower_incident"
    assert edney1.region_of(cx - 0.05, cy + 0.3) == "post_upper_incident"
    slip = edney1.parameters["matching"]["slip_angle_deg"]
    assert abs(slip) < 20.0


def test_edney1_slip_line_states(edney1):
    states = edney1.uniform_states()
    lower = states["post_lower_refracted"]
    upper = states["post_upper_refracted"]
    assert upper.p == pytest.approx(lower.p, rel=1e-10)
    assert upper.flow_angle_deg == pytest.approx(lower.flow_angle_deg, abs=1e-8)
    assert upper.rho != pytest.approx(lower.rho, rel=1e-6)


def test_edney6_matching(edney6):
    _assert_matched(edney6)
    assert edney6.parameters["reflected_wave"] == "expansion"
    assert edney6.parameters["second_ramp_extra_deg"] == pytest.approx(10.0)
    names = {r.name for r in edney6.regions}
    assert {"freestream", "post_shock1", "post_shock2", "post_merged_shock", "post_reflected_wave"} <= names


def test_edney6_relative_convention_has_no_attached_solution(grid100):
    with pytest.raises((DetachedShock, NoRegularSolution)):
        build_edney6(3.5, 15.0, 25.0, grid100, angle_convention="relative")


def test_edney6_degenerates_to_single_shock(grid100):
    reference = build_edney6(3.5, 15.0, 15.0, grid100)
    assert reference.case == "oblique"
    assert reference.parameters["degenerate_from"] == "edney6"


def test_oblique_zero_deflection_is_uniform():
    reference = build_oblique_case(2.5, 0.0)
    assert len(reference.regions) == 1
    field = project_to_grid(reference, GridSpec(8, 8))
    assert np.allclose(field.density, 1.0, rtol=0.0, atol=0.0)


def test_oblique_detached():
    with pytest.raises(DetachedShock):
        build_oblique_case(2.5, 40.0)


def test_oblique_shock_splits_grid():
    reference = build_oblique_case(2.5, 10.0)
    _assert_matched(reference)
    field = project_to_grid(reference, GridSpec(20, 20))
    rho = field.density
    assert rho.max() > 1.0
    assert rho.min() == pytest.approx(1.0)
    post_rho = reference.regions[0].state.rho
    assert np.all(np.isclose(rho, 1.0, rtol=1e-14) | np.isclose(rho, post_rho, rtol=1e-14))


def test_summary_is_json_serializable(edney1, edney6):
    for reference in (edney1, edney6):
        summary = reference.summary()
        text = json.dumps(summary, default=float)
        assert "regions" in json.loads(text)
        assert summary["max_slip_pressure_residual"] < 1e-10


def test_smooth_field_is_exact_density():
    smooth = SmoothStreamField()
    grid = GridSpec(17, 17)
    field = project_to_grid(smooth, grid)
    x, y = grid.nodes()
    assert np.allclose(field.density, smooth.density(x, y), rtol=0.0, atol=1e-15)
    prim = field.primitives()
    assert np.allclose(prim["p"], smooth.freestream.p, rtol=1e-13)


def test_build_case_dispatch(grid100):
    assert build_case("edney1", 4.0, grid100, alpha1_deg=20.0, alpha2_deg=15.0).case == "edney1"
    assert build_case("smooth", 2.5).case == "smooth"
    with pytest.raises(ValueError):
        build_case("edney4", 4.0)


@pytest.mark.parametrize("case, kwargs", [
    ("oblique", {"mach": 2.5, "theta_deg": 10.0}),
    ("edney1", {"mach": 4.0, "alpha1_deg": 20.0, "alpha2_deg": 15.0}),
    ("edney6", {"mach": 3.5, "alpha1_deg": 15.0, "alpha2_deg": 25.0}),
    ("smooth", {"mach": 2.5}),
])
def test_every_case_builds_and_projects(case, kwargs):
    grid = GridSpec(24, 24)
    reference = build_case(case, geometry=grid, **kwargs)
    assert reference.case == case
    assert reference.summary()["case"] == case
    field = project_to_grid(reference, grid)
    field.check_physical()


def test_analytic_field_requires_case_and_freestream():
    state = FlowState.freestream(2.0)
    with pytest.raises(TypeError):
        AnalyticField(freestream=state, regions=[])
    direct = AnalyticField("custom", state, [])
    assert direct.case == "custom"


def test_node_on_vertical_discontinuity_takes_downstream_state():
    state = FlowState.freestream(2.0)
    post = FlowState(2.0 * state.rho, state.u, state.v, 3.0 * state.p)
    pre_region = Region("pre", (0.5, 0.5), 90.0, 270.0, state=state)
    post_region = Region("post", (0.5, 0.5), -90.0, 90.0, state=post)
    grid = GridSpec(11, 11)
    assert grid.x()[5] == 0.5

    field = project_to_grid(AnalyticField("step", state, [post_region, pre_region]), grid)
    assert np.allclose(field.density[5], post.rho, rtol=1e-14)
    assert np.allclose(field.density[4], state.rho, rtol=1e-14)

    flipped = project_to_grid(AnalyticField("step", state, [pre_region, post_region]), grid)
    assert np.allclose(flipped.density[5], state.rho, rtol=1e-14)
