import dataclasses

import numpy as np
import pytest

from oocsim.controller import (
    ControllerState,
    GlobalGains,
    check_gain_conditions,
    gain_condition_margins,
    init_controller_states,
    output_feedback_derivatives,
    state_feedback_derivatives,
    suggest_gains,
)
from oocsim.costmodel import quadratic_cost
from oocsim.errors import ConfigOverridesV0, ZGuardViolated
from oocsim.netgraph import build_digraph
from oocsim.plantmodel import AgentPlant, solve_regulation_equations, validate_gains
from oocsim.simulator import Scenario, assemble


def integrator_setup(K=1.0, H=None):
    plant = AgentPlant(A=[[0.0]], B=[[1.0]], C=[[1.0]])
    triplet = solve_regulation_equations(plant)
    gains = validate_gains(plant, [[K]], H=None if H is None else [[H]])
    return plant, triplet, gains


def zero_grad(y):
    return np.zeros_like(y)


# -- initialization -----------------------------------------------------------------

def test_init_states_unit_vectors():
    states = init_controller_states(2, 1)
    np.testing.assert_array_equal(states[0].z, [1.0, 0.0])
    np.testing.assert_array_equal(states[1].z, [0.0, 1.0])
    for st in states:
        np.testing.assert_array_equal(st.v, [0.0])
        np.testing.assert_array_equal(st.rho, [0.0])
        assert st.xhat is None


def test_init_states_observer_and_overrides():
    states = init_controller_states(
        3, 1, agent_dims=(2, 2, 3), rho0=[[1.0], [2.0], [3.0]], observer=True)
    assert states[2].xhat.shape == (3,)
    np.testing.assert_array_equal(states[1].rho, [2.0])
    states = init_controller_states(2, 1, v0=[[0.0], [0.0]])
    np.testing.assert_array_equal(states[0].v, [0.0])


def test_init_states_rejects_nonzero_v0():
    with pytest.raises(ConfigOverridesV0):
        init_controller_states(2, 1, v0=[[0.3], [0.0]])


def test_global_gains_positivity():
    with pytest.raises(ValueError):
        GlobalGains(0.0, 1.0)
    with pytest.raises(ValueError):
        GlobalGains(1.0, -2.0)


# -- state feedback law ---------------------------------------------------------------

def test_rest_point_gives_zero_derivatives():
    plant, triplet, gains = integrator_setup()
    state = ControllerState(rho=np.zeros(1), v=np.zeros(1), z=np.array([1.0]))
    u, drho, dv, dz = state_feedback_derivatives(
        0, np.zeros(1), np.zeros(1), [], [], state, triplet, gains,
        GlobalGains(1.0, 1.0), zero_grad)
    for out in (u, drho, dv, dz):
        np.testing.assert_array_equal(out, np.zeros_like(out))


def test_single_agent_gradient_push():
    plant, triplet, gains = integrator_setup()
    cost = quadratic_cost([[0.5]])  # gradient y
    state = ControllerState(rho=np.zeros(1), v=np.zeros(1), z=np.array([1.0]))
    u, drho, dv, dz = state_feedback_derivatives(
        0, np.array([1.0]), np.array([1.0]), [], [], state, triplet, gains,
        GlobalGains(1.0, 1.0), cost.gradient)
    assert drho[0] == pytest.approx(-1.0)
    assert dv[0] == 0.0
    np.testing.assert_array_equal(dz, [0.0])
    # u = Upsilon*omega - K x - (Phi - K Psi) rho = -1 - 1 - 0
    assert u[0] == pytest.approx(-2.0)


def test_two_symmetric_integrators_disagreement():
    plant, triplet, gains = integrator_setup()
    coupling = GlobalGains(1.0, 1.0)
    y = [np.array([1.0]), np.array([-1.0])]
    z = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    outs = []
    for i in (0, 1):
        state = ControllerState(rho=np.zeros(1), v=np.zeros(1), z=z[i])
        j = 1 - i
        _, _, dv, _ = state_feedback_derivatives(
            i, y[i], y[i], [(1.0, y[j])], [(1.0, z[j])], state,
            triplet, gains, coupling, zero_grad)
        outs.append(dv[0])
    assert outs[0] == pytest.approx(2.0)
    assert outs[1] == pytest.approx(-2.0)


def test_z_guard_trips():
    plant, triplet, gains = integrator_setup()
    state = ControllerState(rho=np.zeros(1), v=np.zeros(1), z=np.array([0.0]))
    with pytest.raises(ZGuardViolated):
        state_feedback_derivatives(
            0, np.zeros(1), np.zeros(1), [], [], state, triplet, gains,
            GlobalGains(1.0, 1.0), zero_grad)


def line_ring_scenario(third_cost_scale):
    # 1 hears 2, 2 hears 3, 3 hears 1: agent 3 is not an in-neighbor of 1
    graph = build_digraph([(2, 1, 1.0), (3, 2, 1.0), (1, 3, 1.0)], n=3)
    plants = [AgentPlant(A=[[0.0]], B=[[1.0]], C=[[1.0]]) for _ in range(3)]
    costs = [
        quadratic_cost([[0.5]], [1.0]),
        quadratic_cost([[1.0]], [-2.0]),
        quadratic_cost([[third_cost_scale]], [0.5]),
    ]
    return Scenario(
        name="line", graph=graph, plants=plants, costs=costs,
        coupling=GlobalGains(2.0, 1.0), K=[[[1.0]]] * 3,
    )


def test_locality_bitwise_invariance():
    ode_a = assemble(line_ring_scenario(0.7))
    ode_b = assemble(line_ring_scenario(3.1))
    rng = np.random.default_rng(2)
    s = rng.uniform(-1.0, 1.0, ode_a.dim)
    s[ode_a.layout.z_base:] = np.eye(3).ravel() + 0.1
    da = ode_a.rhs(0.0, s)
    db = ode_b.rhs(0.0, s)
    lay = ode_a.layout
    # agent 1 hears only agent 2, so changing agent 3's cost cannot move
    # any of its derivative components, bit for bit
    for sl in (lay.x_slice(0), lay.rho_slice(0), lay.v_slice(0), lay.z_slice(0)):
        assert da[sl].tobytes() == db[sl].tobytes()
    # agent 3's own rho derivative must differ (its gradient changed)
    assert da[lay.rho_slice(2)].tobytes() != db[lay.rho_slice(2)].tobytes()


# -- output feedback law ----------------------------------------------------------------

def test_output_feedback_matches_state_feedback_at_exact_estimate():
    plant, triplet, gains = integrator_setup(K=1.0, H=2.0)
    coupling = GlobalGains(1.5, 0.5)
    cost = quadratic_cost([[0.5]], [0.3])
    x = np.array([0.8])
    y = plant.C @ x
    rho = np.array([0.2])
    v = np.array([-0.1])
    z = np.array([0.9])
    st_state = ControllerState(rho=rho, v=v, z=z)
    u_state, drho_s, dv_s, dz_s = state_feedback_derivatives(
        0, x, y, [], [], st_state, triplet, gains, coupling, cost.gradient)
    st_out = ControllerState(rho=rho, v=v, z=z, xhat=x.copy())
    u_out, dxhat, drho_o, dv_o, dz_o = output_feedback_derivatives(
        0, y, [], [], st_out, plant, triplet, gains, coupling, cost.gradient)
    np.testing.assert_array_equal(u_state, u_out)
    np.testing.assert_array_equal(drho_s, drho_o)
    np.testing.assert_array_equal(dxhat, plant.A @ x + plant.B @ u_state)


def test_observer_innovation_drives_estimate():
    plant, triplet, gains = integrator_setup(K=1.0, H=2.0)
    state = ControllerState(rho=np.zeros(1), v=np.zeros(1), z=np.array([1.0]),
                            xhat=np.zeros(1))
    u, dxhat, *_ = output_feedback_derivatives(
        0, np.array([1.0]), [], [], state, plant, triplet, gains,
        GlobalGains(1.0, 1.0), zero_grad)
    assert u[0] == 0.0
    assert dxhat[0] == pytest.approx(2.0)


# -- gain conditions ---------------------------------------------------------------------

def test_check_gain_conditions_feasible_point():
    check = check_gain_conditions(1.0, 1.0, 1.0, 0.5, 1.0, 100.0, 10.0)
    assert check.feasible
    assert all(margin > 0.0 for margin in check.margins)
    # delta = 2 is a witness: margins (1, 2.375, 50)
    margins = gain_condition_margins(1.0, 1.0, 1.0, 0.5, 1.0, 100.0, 10.0, 2.0)
    assert margins[0] == pytest.approx(1.0)
    assert margins[1] == pytest.approx(2.375)
    assert margins[2] == pytest.approx(50.0)


def test_check_gain_conditions_infeasible_point():
    check = check_gain_conditions(1.0, 1.0, 1.0, 0.5, 1.0, 1e-3, 1e-3)
    assert not check.feasible


def test_check_gain_conditions_rejects_nonpositive_inputs():
    with pytest.raises(ValueError):
        check_gain_conditions(-1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0)


def test_suggest_gains_reference_point():
    delta, gamma1, gamma2 = suggest_gains(1.0, 1.0, 1.0, 0.5, 1.0, mode="state")
    assert delta == pytest.approx(2.0)
    assert gamma2 == pytest.approx(10.5)
    assert gamma1 == pytest.approx(110.25)


def test_suggest_gains_delta_halves_when_m_doubles():
    d1, _, _ = suggest_gains(1.0, 1.0, 1.0, 0.5, 1.0)
    d2, _, _ = suggest_gains(2.0, 1.0, 1.0, 0.5, 1.0)
    assert d2 == pytest.approx(d1 / 2.0)


def test_suggest_gains_output_mode_is_more_demanding():
    d_s, g1_s, g2_s = suggest_gains(1.0, 1.0, 1.0, 0.5, 1.0, mode="state")
    d_o, g1_o, g2_o = suggest_gains(1.0, 1.0, 1.0, 0.5, 1.0, mode="output")
    assert d_o == pytest.approx(3.0)
    assert g1_o > g1_s and g2_o > g2_s


def test_suggested_gains_always_check_out():
    rng = np.random.default_rng(17)
    for _ in range(100):
        m, M, normC, r_min, lambda2 = np.exp(rng.uniform(-2.0, 2.0, size=5))
        M = max(m, M)
        r_min = min(r_min, 1.0)
        mode = "state" if rng.integers(2) else "output"
        _, gamma1, gamma2 = suggest_gains(m, M, normC, r_min, lambda2, mode=mode)
        check = check_gain_conditions(m, M, normC, r_min, lambda2,
                                      gamma1, gamma2, mode=mode)
        assert check.feasible


def test_feasibility_preserved_under_gain_scaling():
    rng = np.random.default_rng(23)
    for _ in range(50):
        m, M, normC, r_min, lambda2 = np.exp(rng.uniform(-1.5, 1.5, size=5))
        M = max(m, M)
        r_min = min(r_min, 1.0)
        delta, gamma1, gamma2 = suggest_gains(m, M, normC, r_min, lambda2)
        before = gain_condition_margins(m, M, normC, r_min, lambda2,
                                        gamma1, gamma2, delta)
        assert all(margin > 0.0 for margin in before)
        c = float(rng.uniform(1.0, 4.0))
        after = gain_condition_margins(m, M, normC, r_min, lambda2,
                                       gamma1 * c * c, gamma2 * c, delta)
        assert all(margin > 0.0 for margin in after)
