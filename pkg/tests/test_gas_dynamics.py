import math

import pytest

from errors import DetachedShock, NonPhysicalState, SubsonicInput, SubsonicNormalMach
from gas_dynamics import (
    FlowState,
    conserved_to_primitive,
    detachment_angle,
    inverse_prandtl_meyer,
    jump_residuals,
    normal_shock_ratios,
    oblique_shock_downstream,
    prandtl_meyer_expansion,
    prandtl_meyer_max,
    prandtl_meyer_nu,
    primitive_to_conserved,
    shock_polar_match,
    theta_beta_m,
    theta_beta_residual,
    turn_flow,
)


@pytest.mark.parametrize("mach,theta", [(2.0, 10.0), (3.0, 20.0), (4.0, 20.0), (3.5, 15.0), (1.5, 5.0)])
def test_theta_beta_m_residual(mach, theta):
    beta = theta_beta_m(mach, theta)
    assert abs(theta_beta_residual(mach, theta, beta)) < 1e-12


def test_theta_beta_m_known_values():
    assert theta_beta_m(2.0, 10.0) == pytest.approx(39.3139, abs=1e-3)
    assert theta_beta_m(3.0, 20.0) == pytest.approx(37.7636, abs=1e-3)


def test_strong_branch_above_weak():
    weak = theta_beta_m(3.0, 20.0, "weak")
    strong = theta_beta_m(3.0, 20.0, "strong")
    assert strong > weak
    assert abs(theta_beta_residual(3.0, 20.0, strong)) < 1e-12


def test_zero_deflection_gives_mach_wave():
    assert theta_beta_m(2.0, 0.0) == pytest.approx(30.0, abs=1e-12)
    assert theta_beta_m(2.0, 0.0, "strong") == 90.0


def test_detached_shock():
    assert detachment_angle(2.0) == pytest.approx(22.97, abs=0.02)
    assert detachment_angle(3.5) == pytest.approx(36.87, abs=0.05)
    with pytest.raises(DetachedShock):
        theta_beta_m(2.0, 25.0)


def test_subsonic_mach_rejected():
    with pytest.raises(SubsonicInput):
        theta_beta_m(0.8, 5.0)


def test_normal_shock_pressure_ratio():
    density_ratio, pressure_ratio = normal_shock_ratios(2.0)
    assert abs(pressure_ratio - 4.5) < 1e-10
    assert density_ratio == pytest.approx(8.0 / 3.0, rel=1e-14)


def test_oblique_shock_downstream_jump_conditions():
    free = FlowState.freestream(4.0)
    beta = theta_beta_m(4.0, 20.0)
    shock = oblique_shock_downstream(free, beta, 1)
    assert shock.deflection_deg == pytest.approx(20.0, abs=1e-9)
    assert shock.downstream.flow_angle_deg == pytest.approx(20.0, abs=1e-9)
    residuals = shock.jump_residuals()
    for key in ("mass", "normal_momentum", "tangential_velocity", "total_enthalpy"):
        assert residuals[key] < 1e-10
    assert residuals["entropy_jump"] > 0.0


def test_negative_family_turns_flow_clockwise():
    free = FlowState.freestream(4.0)
    shock = oblique_shock_downstream(free, theta_beta_m(4.0, 15.0), -1)
    assert shock.downstream.flow_angle_deg == pytest.approx(-15.0, abs=1e-9)
    assert max(v for k, v in shock.jump_residuals().items() if k != "entropy_jump") < 1e-10


def test_subsonic_normal_mach():
    with pytest.raises(SubsonicNormalMach):
        oblique_shock_downstream(FlowState.freestream(2.0), 20.0)


def test_prandtl_meyer_values():
    assert prandtl_meyer_nu(1.0) == 0.0
    assert prandtl_meyer_nu(2.0) == pytest.approx(26.3798, abs=1e-4)
    assert prandtl_meyer_max() == pytest.approx(90.0 * (math.sqrt(6.0) - 1.0), rel=1e-12)
    assert prandtl_meyer_nu(1e8) == pytest.approx(prandtl_meyer_max(), abs=1e-5)
    with pytest.raises(SubsonicInput):
        prandtl_meyer_nu(0.9)


def test_inverse_prandtl_meyer():
    assert inverse_prandtl_meyer(prandtl_meyer_nu(2.5)) == pytest.approx(2.5, abs=1e-10)
    assert inverse_prandtl_meyer(0.0) == pytest.approx(1.0, abs=1e-12)


def test_expansion_is_isentropic():
    free = FlowState.freestream(2.0)
    fan = prandtl_meyer_expansion(free, 10.0, 1)
    down = fan.downstream
    assert down.mach > free.mach
    assert down.flow_angle_deg == pytest.approx(-10.0, abs=1e-12)
    assert down.entropy == pytest.approx(free.entropy, rel=1e-12)
    assert down.total_enthalpy == pytest.approx(free.total_enthalpy, rel=1e-12)
    assert prandtl_meyer_nu(down.mach) - prandtl_meyer_nu(free.mach) == pytest.approx(10.0, abs=1e-9)


def test_turn_flow_picks_wave_kind():
    free = FlowState.freestream(3.0)
    assert turn_flow(free, 10.0, 1).kind == "shock"
    assert turn_flow(free, -10.0, 1).kind == "expansion"
    assert turn_flow(free, 10.0, -1).kind == "expansion"
    assert turn_flow(free, 0.0, 1).kind == "none"


def test_shock_polar_match_symmetric_crossing():
    free = FlowState.freestream(3.0)
    lower = turn_flow(free, 12.0, 1).downstream
    upper = turn_flow(free, -12.0, -1).downstream
    match = shock_polar_match(lower, upper)
    assert match.slip_angle_deg == pytest.approx(0.0, abs=1e-9)
    assert match.pressure_residual < 1e-10
    assert match.lower.kind == "shock" and match.upper.kind == "shock"


def test_freestream_state():
    free = FlowState.freestream(3.0)
    assert free.sound_speed == pytest.approx(1.0, rel=1e-15)
    assert free.mach == pytest.approx(3.0, rel=1e-15)
    assert conserved_to_primitive(primitive_to_conserved(free)).p == pytest.approx(free.p, rel=1e-14)


def test_non_physical_state():
    with pytest.raises(NonPhysicalState):
        FlowState(-1.0, 0.0, 0.0, 1.0)
    with pytest.raises(NonPhysicalState):
        FlowState(1.0, 0.0, 0.0, 0.0)


def test_jump_residuals_of_identical_states():
    free = FlowState.freestream(2.0)
    residuals = jump_residuals(free, free, 45.0)
    assert residuals["mass"] == 0.0
    assert residuals["entropy_jump"] == 0.0
