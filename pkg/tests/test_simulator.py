import dataclasses
import math

import numpy as np
import pytest

from oocsim.controller import GlobalGains
from oocsim.costmodel import centralized_minimizer, quadratic_cost
from oocsim.errors import (
    ConfigOverridesV0,
    NumericalBlowup,
    ValidationError,
    ZGuardViolated,
)
from oocsim.netgraph import build_digraph, spectral_info
from oocsim.plantmodel import AgentPlant
from oocsim.scenarios import example1, example2
from oocsim.simulator import (
    Scenario,
    assemble,
    compute_metrics,
    fit_log_decay,
    integrate,
    output_error,
    run_scenario,
    scenario_constants,
    settling_time,
)


def toy_scenario(mode="state", **overrides):
    graph = build_digraph([(1, 2, 1.0), (2, 1, 1.0)], n=2)
    plants = [AgentPlant(A=[[0.0]], B=[[1.0]], C=[[1.0]]) for _ in range(2)]
    costs = [quadratic_cost([[0.5]], [-1.0]), quadratic_cost([[0.5]], [1.0])]
    base = dict(
        name="toy", graph=graph, plants=plants, costs=costs,
        coupling=GlobalGains(2.0, 1.0), mode=mode,
        K=[[[1.0]], [[1.0]]], H=[[[1.5]], [[1.5]]],
        horizon=5.0, step=1e-3, stride=10, seed=3,
    )
    base.update(overrides)
    return Scenario(**base)


# -- assembly ---------------------------------------------------------------------

def test_assembled_dimensions():
    assert assemble(example2("g8_1")).dim == 62
    assert assemble(example2("g8_1", mode="output")).dim == 76
    assert assemble(example1()).dim == 36


def test_layout_labels_cover_state():
    ode = assemble(example2("g8_1", mode="output"))
    labels = ode.layout.state_labels()
    assert len(labels) == 76
    assert labels[0] == "x[1][0]"
    assert "xhat[1][0]" in labels
    assert labels[-1] == "z[6][5]"


def test_assemble_rejects_nonzero_v0():
    with pytest.raises(ConfigOverridesV0):
        assemble(toy_scenario(v0=np.array([0.1, 0.0])))


def test_assemble_rejects_mismatched_costs():
    sc = toy_scenario()
    sc.costs = [quadratic_cost(np.eye(2))] * 2
    with pytest.raises(ValidationError):
        assemble(sc)


def test_assemble_rejects_bad_triplet():
    sc = toy_scenario(triplets=[(np.array([[5.0]]), np.array([[0.0]]),
                                 np.array([[1.0]]))] * 2)
    with pytest.raises(ValidationError):
        assemble(sc)


def test_with_preset_unknown_name():
    with pytest.raises(ValidationError):
        example2().with_preset("g99")


def test_auto_gains_resolves_and_warns_on_large_step():
    sc = toy_scenario(auto_gains=True, step=0.05)
    with pytest.warns(UserWarning):
        ode = assemble(sc)
    assert ode.coupling.gamma1 > sc.coupling.gamma1


def test_initial_state_defaults_and_overrides():
    ode = assemble(toy_scenario(seed=42))
    s0 = ode.initial_state()
    lay = ode.layout
    assert np.all(s0[:2] >= -4.0) and np.all(s0[:2] <= 6.0)
    np.testing.assert_array_equal(s0[lay.v_base:lay.z_base], np.zeros(2))
    np.testing.assert_array_equal(s0[lay.z_base:], np.eye(2).ravel())
    again = assemble(toy_scenario(seed=42)).initial_state()
    np.testing.assert_array_equal(s0, again)
    pinned = assemble(toy_scenario(x0=[0.5, -0.5], rho0=[0.1, 0.2]))
    s0 = pinned.initial_state()
    np.testing.assert_array_equal(s0[:2], [0.5, -0.5])
    np.testing.assert_array_equal(s0[2:4], [0.1, 0.2])


# -- integrator --------------------------------------------------------------------

def test_integrate_exponential_decay():
    traj = integrate(lambda t, y: -y, np.array([1.0]), h=0.01, T=1.0, stride=10)
    assert traj.states[-1, 0] == pytest.approx(math.exp(-1.0), abs=1e-9)
    assert traj.times[-1] == pytest.approx(1.0)


def test_integrate_row_count_contract():
    traj = integrate(lambda t, y: -y, np.array([1.0]), h=0.01, T=1.0, stride=10)
    assert traj.states.shape[0] == 100 // 10 + 1
    traj = integrate(lambda t, y: -y, np.array([1.0]), h=0.01, T=0.995, stride=7)
    assert traj.states.shape[0] == 99 // 7 + 1


def test_integrate_harmonic_oscillator_order():
    f = lambda t, s: np.array([s[1], -s[0]])
    period = 2.0 * math.pi
    errors = []
    for steps in (200, 400):
        traj = integrate(f, np.array([1.0, 0.0]), h=period / steps, T=period,
                         stride=steps)
        errors.append(np.linalg.norm(traj.states[-1] - [1.0, 0.0]))
    assert errors[0] <= 1e-7
    ratio = errors[0] / errors[1]
    assert 12.0 <= ratio <= 20.0


def test_integrate_z_flow_reaches_left_eigenvector():
    # agent 1's estimator row of the matrix flow Z' = -L Z, Z(0) = I
    info = spectral_info(build_digraph(
        [(3, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 2, 1.0)], n=4))
    L = info.laplacian
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    traj = integrate(lambda t, w: -L.T @ w, e1, h=1e-3, T=50.0, stride=100)
    assert np.abs(traj.states[-1] - info.r).max() <= 1e-6


def test_integrate_rejects_bad_arguments():
    f = lambda t, y: -y
    with pytest.raises(ValueError):
        integrate(f, np.array([1.0]), h=0.0, T=1.0)
    with pytest.raises(ValueError):
        integrate(f, np.array([1.0]), h=0.1, T=0.01)


def test_integrate_aborts_on_blowup():
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NumericalBlowup) as err:
            integrate(lambda t, y: y * y, np.array([1.0]), h=1e-3, T=2.0)
    assert err.value.time is not None
    assert 0.9 <= err.value.time <= 1.1


def test_integrate_propagates_z_guard_with_time():
    ode = assemble(toy_scenario())
    s0 = ode.initial_state()
    s0[ode.layout.z_base:] = 0.0
    with pytest.raises(ZGuardViolated) as err:
        integrate(ode, s0, h=1e-3, T=1.0)
    assert err.value.time is not None


# -- closed-loop behavior ------------------------------------------------------------

def test_equilibrium_is_fixed_point_both_modes():
    for mode in ("state", "output"):
        sc = example2("g8_1", mode=mode)
        ode = assemble(sc)
        y_star = centralized_minimizer(sc.costs)
        eq = ode.equilibrium_state(y_star)
        assert np.linalg.norm(ode.rhs(0.0, eq)) <= 1e-8


def test_metrics_from_equilibrium_start():
    sc = dataclasses.replace(example2("g8_1"), horizon=2.0)
    ode = assemble(sc)
    y_star = centralized_minimizer(sc.costs)
    eq = ode.equilibrium_state(y_star)
    traj = integrate(ode, eq, sc.step, sc.horizon, sc.stride)
    metrics = compute_metrics(traj, sc, y_star, spectral=ode.spectral,
                              settle_eps=(1e-3,))
    assert metrics.final_output_error <= 1e-8
    assert metrics.settling_times[1e-3] == 0.0
    assert metrics.optimality_residual <= 1e-9


def test_toy_run_converges_and_conserves():
    sc = toy_scenario(horizon=20.0)
    ode, traj = run_scenario(sc)
    y_star = centralized_minimizer(sc.costs)
    assert abs(y_star[0]) <= 1e-12
    metrics = compute_metrics(traj, sc, y_star, spectral=ode.spectral)
    assert metrics.final_output_error <= 1e-6
    assert metrics.rv_drift <= 1e-6
    assert metrics.z_mass_drift <= 1e-8
    assert metrics.z_positivity_min > 0.0
    assert metrics.z_eigvec_error <= 1e-6
    assert metrics.optimality_residual <= 1e-3


def test_mode_consistency_exact_estimate_start():
    x0 = [0.5, -0.3]
    rho0 = [0.2, -0.1]
    sc_state = toy_scenario(x0=x0, rho0=rho0, horizon=5.0)
    sc_out = toy_scenario(mode="output", x0=x0, rho0=rho0, xhat0=x0, horizon=5.0)
    _, traj_state = run_scenario(sc_state)
    _, traj_out = run_scenario(sc_out)
    assert np.abs(traj_state.outputs - traj_out.outputs).max() <= 1e-9


def test_step_halving_self_consistency():
    sc = toy_scenario(horizon=20.0)
    _, coarse = run_scenario(sc)
    _, fine = run_scenario(dataclasses.replace(sc, step=5e-4, stride=20))
    assert np.abs(coarse.outputs[-1] - fine.outputs[-1]).max() <= 1e-8


# -- metrics helpers ------------------------------------------------------------------

def test_settling_time_semantics():
    times = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    err = np.array([1.0, 0.5, 0.05, 0.005, 0.004])
    assert settling_time(times, err, 1e-2) == 3.0
    assert settling_time(times, err, 10.0) == 0.0
    assert settling_time(times, err, 1e-3) is None
    wiggly = np.array([1.0, 0.005, 0.5, 0.005, 0.004])
    assert settling_time(times, wiggly, 1e-2) == 3.0


def test_fit_log_decay_pure_exponential():
    times = np.linspace(0.0, 20.0, 2001)
    err = 10.0 * np.exp(-0.8 * times)
    slope, r2, n = fit_log_decay(times, err, upper=1e-1, lower=1e-4)
    assert slope == pytest.approx(-0.8, rel=1e-6)
    assert r2 > 0.999999
    assert n >= 20


def test_fit_log_decay_short_window_rejected():
    times = np.linspace(0.0, 1.0, 11)
    err = np.full(11, 0.5)
    slope, r2, n = fit_log_decay(times, err)
    assert slope is None and r2 is None


def test_scenario_constants_sources():
    consts1 = scenario_constants(example1())
    assert consts1["m_source"] == "per-cost"
    assert consts1["m"] == pytest.approx(0.4)
    assert consts1["M"] == pytest.approx(1.6)
    assert consts1["normC"] == pytest.approx(1.0)
    consts2 = scenario_constants(example2())
    # two local costs are non-convex on the box, so the bound falls back
    # to the aggregate estimate divided by the agent count
    assert consts2["m_source"] == "aggregate/N"
    assert consts2["m"] > 0.0
    assert min(m for m, _ in consts2["per_cost"]) < 0.0
    assert consts2["normC"] == pytest.approx(math.sqrt(3.0))


def test_gain_check_fixture_for_benchmark_presets():
    # regression fixture: constants and margins frozen from the first
    # computation; the sufficient conditions reject both working presets
    from oocsim.controller import check_gain_conditions

    consts = scenario_constants(example2())
    assert consts["m"] == pytest.approx(0.44951938688104226, rel=1e-9)
    assert consts["M"] == pytest.approx(6.017402622200225, rel=1e-9)
    for gamma1, gamma2, margins in (
        (8.0, 1.0, (8.990378745910022e-07, -54.38974933021074, 0.5484992747131564)),
        (20.0, 8.0, (8.990378745910022e-07, -53.38974933021075, -0.03890356121509009)),
    ):
        chk = check_gain_conditions(
            consts["m"], consts["M"], consts["normC"], consts["r_min"],
            consts["lambda2"], gamma1, gamma2, mode="state")
        assert not chk.feasible
        assert chk.delta == pytest.approx(43.61232760042506, rel=1e-9)
        for got, frozen in zip(chk.margins, margins):
            assert got == pytest.approx(frozen, rel=1e-6, abs=1e-12)


def test_output_error_uses_stacked_norm():
    sc = toy_scenario(horizon=1.0)
    _, traj = run_scenario(sc)
    err = output_error(traj, np.zeros(1))
    manual = np.linalg.norm(traj.outputs, axis=1)
    np.testing.assert_allclose(err, manual)
