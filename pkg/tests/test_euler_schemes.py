import numpy as np
import pytest

from analytic_reference import build_oblique_case
from euler_schemes import (
    GHOST,
    STEPPERS,
    BoundaryPadding,
    artificial_viscosity_flux,
    hllc_flux,
    minmod,
    physical_flux,
    pressure_switch,
    stable_time_step,
    steger_warming_split,
    swap_xy,
    van_leer,
    weno3_reconstruct,
)
from flow_field import ConservedField, GridSpec
from gas_dynamics import FlowState, primitive_to_conserved
from solver_ensemble import SchemeConfig

OPTIONS = {
    "cir1": SchemeConfig("cir1"),
    "maccormack": SchemeConfig("maccormack", av_kind="second", av_mu=0.01),
    "lax_wendroff2": SchemeConfig("lax_wendroff2", av_kind="fourth", av_mu=0.01),
    "muscl_hllc2": SchemeConfig("muscl_hllc2", limiter="vanleer"),
    "weno3": SchemeConfig("weno3"),
}


def _random_states(n, seed=0):
    rng = np.random.default_rng(seed)
    states = [FlowState(0.5 + rng.random(), 3.0 * rng.random() - 1.0, rng.random() - 0.5, 0.2 + rng.random())
              for _ in range(n)]
    return np.array([primitive_to_conserved(s) for s in states])


def test_flux_vector_splitting_sums_to_physical_flux():
    q = _random_states(50)
    total = steger_warming_split(q, 1.4, 1) + steger_warming_split(q, 1.4, -1)
    assert np.allclose(total, physical_flux(q, 1.4), rtol=1e-12, atol=1e-12)


def test_hllc_is_consistent():
    q = _random_states(50, seed=1)
    rho = q[:, 0]
    u, v = q[:, 1] / rho, q[:, 2] / rho
    p = 0.4 * (q[:, 3] - 0.5 * rho * (u * u + v * v))
    w = np.stack([rho, u, v, p], axis=-1)
    assert np.allclose(hllc_flux(w, w, 1.4), physical_flux(q, 1.4), rtol=1e-12, atol=1e-12)


def test_limiters():
    a = np.array([1.0, -2.0, 1.0, 0.0])
    b = np.array([3.0, -1.0, -1.0, 2.0])
    assert minmod(a, b).tolist() == [1.0, -1.0, 0.0, 0.0]
    assert van_leer(a, b).tolist() == pytest.approx([1.5, -4.0 / 3.0, 0.0, 0.0])


def test_weno3_reproduces_linear_data():
    a, b, c = np.array([1.0]), np.array([2.0]), np.array([3.0])
    assert weno3_reconstruct(a, b, c)[0] == pytest.approx(2.5, abs=1e-14)
    assert weno3_reconstruct(b, b, b)[0] == 2.0


def test_swap_is_an_involution():
    q = np.random.default_rng(2).random((5, 7, 4))
    assert swap_xy(q).shape == (7, 5, 4)
    assert np.array_equal(swap_xy(swap_xy(q)), q)


def test_stable_time_step():
    grid = GridSpec(11, 21)
    q = ConservedField.uniform(grid, FlowState.freestream(2.0)).data
    assert stable_time_step(q, grid, 1.4, 0.5) == pytest.approx(0.5 * 0.05 / 3.0, rel=1e-14)


@pytest.mark.parametrize("scheme_id", sorted(STEPPERS))
def test_freestream_is_preserved(scheme_id, uniform_case):
    grid = GridSpec(16, 16)
    boundary = BoundaryPadding(grid, uniform_case)
    q = ConservedField.uniform(grid, uniform_case.freestream).data
    dt = stable_time_step(boundary.pad(q), grid, 1.4, 0.4)
    q_new, _ = STEPPERS[scheme_id](q, boundary, dt, OPTIONS[scheme_id])
    assert np.max(np.abs(q_new - q)) < 1e-12


@pytest.mark.parametrize("scheme_id", sorted(STEPPERS))
def test_update_balances_boundary_flux(scheme_id):
    case = build_oblique_case(2.5, 10.0)
    grid = GridSpec(16, 16)
    boundary = BoundaryPadding(grid, case)
    q = ConservedField.uniform(grid, case.freestream).data
    for _ in range(3):
        dt = stable_time_step(boundary.pad(q), grid, 1.4, 0.4)
        q_new, net_flux = STEPPERS[scheme_id](q, boundary, dt, OPTIONS[scheme_id])
        change = (q_new - q).sum(axis=(0, 1)) * grid.hx * grid.hy
        assert np.allclose(change, -dt * net_flux, rtol=1e-9, atol=1e-12)
        q = q_new


def test_dirichlet_outflow_pins_right_boundary(uniform_case):
    grid = GridSpec(10, 10)
    boundary = BoundaryPadding(grid, build_oblique_case(2.5, 10.0), outflow="dirichlet")
    q = ConservedField.uniform(grid, uniform_case.freestream).data
    padded = boundary.pad(q)
    assert np.array_equal(padded[-1], boundary.padded_reference[-1])
    with pytest.raises(ValueError):
        BoundaryPadding(grid, uniform_case, outflow="periodic")


def _x_column(n, pressure, density=None):
    """x 방향으로만 변하는 유령 노드 포함 배열 (n + 2*GHOST, 1 + 2*GHOST, 4)"""
    h = 1.0 / n
    x = h * (np.arange(n + 2 * GHOST) - GHOST)
    p = pressure(x)
    rho = density(x) if density is not None else np.ones_like(x)
    q = np.stack([rho, 2.0 * rho, np.zeros_like(x), p / 0.4 + 0.5 * rho * 4.0], axis=-1)
    return np.repeat(q[:, None, :], 1 + 2 * GHOST, axis=1)


def test_pressure_switch_is_off_for_uniform_pressure():
    q = _x_column(40, lambda x: np.ones_like(x), density=lambda x: 1.0 + 0.3 * np.sin(2.0 * np.pi * x))
    assert np.all(pressure_switch(q, 1.4) == 0.0)
    assert np.all(artificial_viscosity_flux(q, 1.4, "second", 0.01) == 0.0)


def test_pressure_switch_saturates_at_a_jump():
    q = _x_column(40, lambda x: np.where(x < 0.5, 1.0, 4.5))
    switch = pressure_switch(q, 1.4)[:, 0]
    assert switch.max() == 1.0
    assert np.count_nonzero(switch) <= 4


def test_second_order_viscosity_vanishes_at_third_order_in_smooth_flow():
    def pressure(x):
        return 1.0 + 0.2 * np.sin(2.0 * np.pi * x)

    coarse, fine = _x_column(40, pressure), _x_column(80, pressure)
    assert pressure_switch(coarse, 1.4).max() / pressure_switch(fine, 1.4).max() == pytest.approx(4.0, rel=0.05)
    ratio = (np.abs(artificial_viscosity_flux(coarse, 1.4, "second", 0.01)).max()
             / np.abs(artificial_viscosity_flux(fine, 1.4, "second", 0.01)).max())
    assert 6.5 < ratio < 9.5


@pytest.mark.parametrize("scheme_id", sorted(STEPPERS))
def test_freestream_is_preserved_over_many_steps(scheme_id, uniform_case):
    grid = GridSpec(12, 12)
    boundary = BoundaryPadding(grid, uniform_case)
    q0 = ConservedField.uniform(grid, uniform_case.freestream).data
    q = q0.copy()
    for _ in range(200):
        dt = stable_time_step(boundary.pad(q), grid, 1.4, 0.4)
        q, _ = STEPPERS[scheme_id](q, boundary, dt, OPTIONS[scheme_id])
    assert np.max(np.abs(q - q0)) < 1e-12
