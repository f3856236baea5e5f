"""Heterogeneous LTI agents, the regulation matrix equations, and gain
validation/synthesis.

The regulation equations tie a plant (A, B, C) to the consensus layer::

    C Psi = I_q,      B Phi = A Psi,      B Upsilon = Psi

Solutions are generally non-unique; the solver returns the minimum-norm
least-squares triplet for determinism, and any externally supplied triplet is
accepted as long as its residual vanishes.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import NotDetectable, NotHurwitz, NotStabilizable, Unsolvable
from .netgraph import kron, vec
from .policy import DEFAULT


@dataclass(frozen=True)
class AgentPlant:
    """One agent's dynamics x' = A x + B u, y = C x.

    Shapes: A is (n, n), B is (n, p), C is (q, n).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got {B.shape}")
        if C.shape[1] != n:
            raise ValueError(f"C must have {n} columns, got {C.shape}")
        for name, mat in (("A", A), ("B", B), ("C", C)):
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.B.shape[1]

    @property
    def q(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class SolutionTriplet:
    """Solution (Upsilon, Phi, Psi) of the regulation equations.

    ``residual`` is the largest Frobenius residual of the three equations.
    """

    Upsilon: np.ndarray
    Phi: np.ndarray
    Psi: np.ndarray
    residual: float


@dataclass(frozen=True)
class GainSet:
    """Validated feedback gain K and optional observer gain H.

    The spectral abscissas (largest real part of the closed-loop and
    observer matrices) are recorded at validation time.
    """

    K: np.ndarray
    H: Optional[np.ndarray]
    spectral_abscissa_closed: float
    spectral_abscissa_observer: Optional[float]


def check_regulation_rank(plant, policy=DEFAULT):
    """Solvability test for the regulation equations.

    Forms the (q + n) x 2p block matrix [[C B, 0], [-A B, B]] and reports
    whether its numerical rank equals n + q.  Singular values below
    ``policy.rank_rel`` times the largest one count as zero.

    Returns
    -------
    (bool, int)
        (ok, rank); ok is True iff rank == n + q.
    """
    A, B, C = plant.A, plant.B, plant.C
    n, p, q = plant.n, plant.p, plant.q
    block = np.block([
        [C @ B, np.zeros((q, p))],
        [-A @ B, B],
    ])
    sigma = np.linalg.svd(block, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(sigma > policy.rank_rel * sigma[0]))
    return rank == n + q, rank


def triplet_residual(plant, Upsilon, Phi, Psi):
    """Largest Frobenius residual of the three regulation equations."""
    Upsilon = np.atleast_2d(np.asarray(Upsilon, dtype=float))
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    Psi = np.atleast_2d(np.asarray(Psi, dtype=float))
    q = plant.q
    res_psi = np.linalg.norm(plant.C @ Psi - np.eye(q))
    res_phi = np.linalg.norm(plant.B @ Phi - plant.A @ Psi)
    res_ups = np.linalg.norm(plant.B @ Upsilon - Psi)
    return float(max(res_psi, res_phi, res_ups))


def solve_regulation_equations(plant, policy=DEFAULT):
    """Minimum-norm least-squares solution of the regulation equations.

    The three matrix equations are vectorized with the identity
    vec(E F G) = (G^T kron E) vec(F) into one linear system in
    (vec Psi, vec Phi, vec Upsilon) and solved in a single deterministic
    least-squares call, so repeated solves agree bit for bit.

    Raises
    ------
    Unsolvable
        If the residual exceeds ``policy.residual_fail`` (the rank condition
        fails in a way the tolerance could not see).
    """
    A, B, C = plant.A, plant.B, plant.C
    n, p, q = plant.n, plant.p, plant.q
    Iq = np.eye(q)
    npsi, nphi = n * q, p * q

    rows_a = np.hstack([kron(Iq, C), np.zeros((q * q, nphi)), np.zeros((q * q, nphi))])
    rows_b = np.hstack([kron(Iq, A), -kron(Iq, B), np.zeros((npsi, nphi))])
    rows_c = np.hstack([-np.eye(npsi), np.zeros((npsi, nphi)), kron(Iq, B)])
    system = np.vstack([rows_a, rows_b, rows_c])
    rhs = np.concatenate([vec(Iq), np.zeros(npsi), np.zeros(npsi)])

    solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    Psi = solution[:npsi].reshape((n, q), order="F")
    Phi = solution[npsi:npsi + nphi].reshape((p, q), order="F")
    Upsilon = solution[npsi + nphi:].reshape((p, q), order="F")

    residual = triplet_residual(plant, Upsilon, Phi, Psi)
    if residual > policy.residual_fail:
        raise Unsolvable(
            f"regulation equations unsolvable: residual {residual:g} > {policy.residual_fail:g}"
        )
    for mat in (Psi, Phi, Upsilon):
        mat.setflags(write=False)
    return SolutionTriplet(Upsilon=Upsilon, Phi=Phi, Psi=Psi, residual=residual)


def validate_gains(plant, K, H=None, policy=DEFAULT):
    """Check that A - B K (and A - H C when given) are Hurwitz.

    Returns
    -------
    GainSet
        With the spectral abscissas recorded.

    Raises
    ------
    NotHurwitz
        Naming the offending eigenvalue.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    closed = plant.A - plant.B @ K
    eigs = np.linalg.eigvals(closed)
    abscissa = float(eigs.real.max())
    if abscissa >= -policy.hurwitz_margin:
        worst = eigs[int(np.argmax(eigs.real))]
        raise NotHurwitz(f"A - B K has eigenvalue {worst} with Re >= {-policy.hurwitz_margin:g}")

    obs_abscissa = None
    if H is not None:
        H = np.atleast_2d(np.asarray(H, dtype=float))
        if H.shape != (plant.n, plant.q):
            H = H.reshape(plant.n, plant.q)
        observer = plant.A - H @ plant.C
        oeigs = np.linalg.eigvals(observer)
        obs_abscissa = float(oeigs.real.max())
        if obs_abscissa >= -policy.hurwitz_margin:
            worst = oeigs[int(np.argmax(oeigs.real))]
            raise NotHurwitz(
                f"A - H C has eigenvalue {worst} with Re >= {-policy.hurwitz_margin:g}"
            )
        H.setflags(write=False)
    K.setflags(write=False)
    return GainSet(
        K=K,
        H=H,
        spectral_abscissa_closed=abscissa,
        spectral_abscissa_observer=obs_abscissa,
    )


def _hautus_ok(A, B):
    # rank [lambda I - A, B] must be n at every eigenvalue with Re >= 0
    n = A.shape[0]
    for lam in np.linalg.eigvals(A):
        if lam.real < 0.0:
            continue
        block = np.hstack([lam * np.eye(n) - A, B.astype(complex)])
        if np.linalg.matrix_rank(block) < n:
            return False, lam
    return True, None


def synthesize_stabilizing_gain(A, B):
    """Stabilizing state-feedback gain from a Riccati solve with unit weights.

    Raises
    ------
    NotStabilizable
        If (A, B) fails the Hautus test at an unstable mode.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[0] != A.shape[0]:
        B = B.reshape(A.shape[0], -1)
    ok, lam = _hautus_ok(A, B)
    if not ok:
        raise NotStabilizable(f"(A, B) not stabilizable: mode {lam} uncontrollable")
    P = scipy.linalg.solve_continuous_are(A, B, np.eye(A.shape[0]), np.eye(B.shape[1]))
    return B.T @ P


def synthesize_observer_gain(A, C):
    """Observer gain from the dual Riccati problem on (A^T, C^T).

    Raises
    ------
    NotDetectable
        If (A, C) fails the dual Hautus test at an unstable mode.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[1] != A.shape[0]:
        C = C.reshape(-1, A.shape[0])
    ok, lam = _hautus_ok(A.T, C.T)
    if not ok:
        raise NotDetectable(f"(A, C) not detectable: mode {lam} unobservable")
    P = scipy.linalg.solve_continuous_are(A.T, C.T, np.eye(A.shape[0]), np.eye(C.shape[0]))
    return P @ C.T
