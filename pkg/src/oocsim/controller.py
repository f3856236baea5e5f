"""Per-agent distributed control laws and the coupling-gain feasibility check.

Both control laws drive an agent from purely local data: its own state (or
observer estimate), its own output, weighted relative outputs of in-neighbors,
and the neighbors' z estimators.  The derivative functions deliberately accept
nothing else, so locality is a property of the signature rather than of
caller discipline.

For agent i with cost gradient g_i, own z component z_i^i and coupling gains
(gamma1, gamma2)::

    omega_i = -g_i(y_i)/z_i^i - gamma1 * sum_j a_ij (y_i - y_j) - gamma2 * v_i
    u_i     = -K_i x_i + Upsilon_i omega_i - (Phi_i - K_i Psi_i) rho_i
    rho_i'  = omega_i
    v_i'    = gamma1 * sum_j a_ij (y_i - y_j)
    z_i'    = -sum_j a_ij (z_i - z_j)

The observer variant replaces x_i by the estimate and adds the innovation
update for it.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigOverridesV0, ZGuardViolated


@dataclass
class ControllerState:
    """One agent's controller variables (views into the stacked state).

    ``z`` is the agent's length-N left-eigenvector estimator; its own
    component must stay positive throughout a run.
    """

    rho: np.ndarray
    v: np.ndarray
    z: np.ndarray
    xhat: Optional[np.ndarray] = None


@dataclass(frozen=True)
class GlobalGains:
    """Coupling gains shared by all agents."""

    gamma1: float
    gamma2: float

    def __post_init__(self):
        if self.gamma1 <= 0.0 or self.gamma2 <= 0.0:
            raise ValueError("coupling gains must be positive")


def init_controller_states(n_agents, q, agent_dims=None, rho0=None, v0=None,
                           xhat0=None, observer=False):
    """Fresh controller states: v = 0 and z_i = i-th unit vector, enforced.

    Parameters
    ----------
    n_agents, q : int
        Network size and output dimension.
    agent_dims : sequence of int, optional
        State dimensions, required when ``observer`` is true.
    rho0 : array_like, optional
        Per-agent initial rho, (n_agents, q); defaults to zero.
    v0 : array_like, optional
        Accepted only when identically zero.
    xhat0 : sequence of arrays, optional
        Per-agent observer initials; defaults to zero.
    observer : bool
        Allocate observer estimates.

    Raises
    ------
    ConfigOverridesV0
        If a nonzero ``v0`` is supplied: the optimality argument needs
        (r^T kron I) v(0) = 0, which the law pins down as v(0) = 0.
    """
    if v0 is not None and np.any(np.asarray(v0, dtype=float) != 0.0):
        raise ConfigOverridesV0("controller.v0 must be omitted or zero")
    if rho0 is None:
        rho0 = np.zeros((n_agents, q))
    else:
        rho0 = np.asarray(rho0, dtype=float).reshape(n_agents, q)
    if observer and agent_dims is None:
        raise ValueError("agent_dims required for observer states")

    states = []
    for i in range(n_agents):
        z = np.zeros(n_agents)
        z[i] = 1.0
        xhat = None
        if observer:
            xhat = (
                np.zeros(agent_dims[i])
                if xhat0 is None
                else np.asarray(xhat0[i], dtype=float).reshape(agent_dims[i]).copy()
            )
        states.append(
            ControllerState(rho=rho0[i].copy(), v=np.zeros(q), z=z, xhat=xhat)
        )
    return states


def state_feedback_derivatives(i, x_i, own_output, neighbor_outputs, neighbor_z,
                               state, triplet, gains, coupling, grad_f_i,
                               rho_gain=None, z_guard=1e-9):
    """Control input and controller derivatives for one agent, state feedback.

    Parameters
    ----------
    i : int
        0-based agent index (selects the own component of ``state.z``).
    x_i, own_output : ndarray
        Agent state and measured output y_i.
    neighbor_outputs, neighbor_z : list of (weight, vector)
        In-neighbor data (a_ij, y_j) and (a_ij, z_j); nothing else about the
        network is visible here.
    state : ControllerState
    triplet : SolutionTriplet
    gains : GainSet
    coupling : GlobalGains
    grad_f_i : callable
        Local cost gradient.
    rho_gain : ndarray, optional
        Precomputed Phi - K Psi (recomputed when omitted; the simulator
        caches it per agent so the hot loop avoids two small matmuls).
    z_guard : float
        Positivity guard on the own z component.

    Returns
    -------
    (u_i, drho, dv, dz)

    Raises
    ------
    ZGuardViolated
        If the own z component is at or below ``z_guard``.
    """
    z_own = state.z[i]
    if z_own <= z_guard:
        raise ZGuardViolated(f"agent {i + 1}: z_own = {z_own:g} <= guard {z_guard:g}")
    if rho_gain is None:
        rho_gain = triplet.Phi - gains.K @ triplet.Psi

    acc = None
    for a, yj in neighbor_outputs:
        term = a * (own_output - yj)
        acc = term if acc is None else acc + term
    if acc is None:
        dv = np.zeros_like(own_output)
        omega = -(grad_f_i(own_output) / z_own) - coupling.gamma2 * state.v
    else:
        dv = coupling.gamma1 * acc
        omega = -(grad_f_i(own_output) / z_own) - dv - coupling.gamma2 * state.v
    u = triplet.Upsilon @ omega - gains.K @ x_i - rho_gain @ state.rho

    zacc = None
    for a, zj in neighbor_z:
        term = a * (state.z - zj)
        zacc = term if zacc is None else zacc + term
    dz = np.zeros_like(state.z) if zacc is None else -zacc
    return u, omega, dv, dz


def output_feedback_derivatives(i, own_output, neighbor_outputs, neighbor_z,
                                state, plant, triplet, gains, coupling,
                                grad_f_i, rho_gain=None, z_guard=1e-9):
    """Observer-based variant: the estimate replaces the true state.

    ``state.xhat`` holds the observer estimate; the returned ``dxhat`` is
    A xhat + B u + H (y_i - C xhat).  The consensus terms use measured
    outputs only, so they are identical in form to the state-feedback law.

    Returns
    -------
    (u_i, dxhat, drho, dv, dz)
    """
    z_own = state.z[i]
    if z_own <= z_guard:
        raise ZGuardViolated(f"agent {i + 1}: z_own = {z_own:g} <= guard {z_guard:g}")
    if rho_gain is None:
        rho_gain = triplet.Phi - gains.K @ triplet.Psi

    xhat = state.xhat
    acc = None
    for a, yj in neighbor_outputs:
        term = a * (own_output - yj)
        acc = term if acc is None else acc + term
    if acc is None:
        dv = np.zeros_like(own_output)
        omega = -(grad_f_i(own_output) / z_own) - coupling.gamma2 * state.v
    else:
        dv = coupling.gamma1 * acc
        omega = -(grad_f_i(own_output) / z_own) - dv - coupling.gamma2 * state.v
    u = triplet.Upsilon @ omega - gains.K @ xhat - rho_gain @ state.rho
    innovation = own_output - plant.C @ xhat
    dxhat = plant.A @ xhat + plant.B @ u + gains.H @ innovation

    zacc = None
    for a, zj in neighbor_z:
        term = a * (state.z - zj)
        zacc = term if zacc is None else zacc + term
    dz = np.zeros_like(state.z) if zacc is None else -zacc
    return u, dxhat, omega, dv, dz


# -- coupling-gain feasibility --------------------------------------------------

@dataclass(frozen=True)
class GainCheck:
    """Result of the sufficient-condition search over the free parameter delta."""

    feasible: bool
    delta: float
    margins: tuple
    mode: str


def gain_condition_margins(m, M, normC, r_min, lambda2, gamma1, gamma2, delta,
                           mode="state"):
    """The three sufficiency margins at a given delta (positive means satisfied).

    State mode::

        2 m - (M^2 + ||C||^2) / delta
        gamma2 r_min - 5 delta / 4 - ||C||^2 / (4 delta)
        gamma1 lambda2 - gamma2^2 / delta

    Output mode doubles the ||C||^2 contributions in the first two margins.
    """
    if mode == "state":
        g_conv = 2.0 * m - (M * M + normC * normC) / delta
        g_damp = gamma2 * r_min - 1.25 * delta - normC * normC / (4.0 * delta)
    elif mode == "output":
        g_conv = 2.0 * m - (M * M + 2.0 * normC * normC) / delta
        g_damp = gamma2 * r_min - 1.25 * delta - normC * normC / (2.0 * delta)
    else:
        raise ValueError(f"mode must be 'state' or 'output', got {mode!r}")
    g_net = gamma1 * lambda2 - gamma2 * gamma2 / delta
    return (g_conv, g_damp, g_net)


def _delta_lower(m, M, normC, mode):
    factor = 1.0 if mode == "state" else 2.0
    return (M * M + factor * normC * normC) / (2.0 * m)


def check_gain_conditions(m, M, normC, r_min, lambda2, gamma1, gamma2,
                          mode="state", grid_points=200):
    """Search the free parameter delta for a point satisfying all three margins.

    The margins are smooth in delta, so a 200-point log grid over
    (delta_lower, 1e4 * delta_lower) suffices at the magnitudes that occur
    in practice.  Feasibility is a sufficient condition only: runs with
    infeasible gains are legitimate and often converge regardless.

    Returns
    -------
    GainCheck
        ``feasible`` plus the best delta (the one maximizing the smallest
        margin) and the margins there.
    """
    for name, val in (("m", m), ("M", M), ("normC", normC), ("r_min", r_min),
                      ("lambda2", lambda2), ("gamma1", gamma1), ("gamma2", gamma2)):
        if val <= 0.0:
            raise ValueError(f"{name} must be positive, got {val:g}")
    lower = _delta_lower(m, M, normC, mode)
    grid = np.geomspace(lower * (1.0 + 1e-6), lower * 1e4, grid_points)
    best = None
    for delta in grid:
        margins = gain_condition_margins(m, M, normC, r_min, lambda2,
                                         gamma1, gamma2, delta, mode)
        worst = min(margins)
        if best is None or worst > best[0]:
            best = (worst, delta, margins)
    worst, delta, margins = best
    return GainCheck(
        feasible=bool(worst > 0.0),
        delta=float(delta),
        margins=tuple(float(m) for m in margins),
        mode=mode,
    )


def suggest_gains(m, M, normC, r_min, lambda2, mode="state"):
    """Coupling gains that satisfy the sufficient conditions by construction.

    Takes delta at twice its lower bound, then doubles the lower bounds the
    remaining two inequalities impose::

        delta  = (M^2 + c ||C||^2) / m              (c = 1 state, 2 output)
        gamma2 = 2 (5 delta^2 + c ||C||^2) / (4 delta r_min)
        gamma1 = 2 gamma2^2 / (lambda2 delta)

    Returns
    -------
    (delta, gamma1, gamma2)
    """
    factor = 1.0 if mode == "state" else 2.0
    if mode not in ("state", "output"):
        raise ValueError(f"mode must be 'state' or 'output', got {mode!r}")
    delta = 2.0 * _delta_lower(m, M, normC, mode)
    gamma2 = 2.0 * (5.0 * delta * delta + factor * normC * normC) / (4.0 * delta * r_min)
    gamma1 = 2.0 * gamma2 * gamma2 / (lambda2 * delta)
    return delta, gamma1, gamma2
