"""Single home for the numeric tolerances used across the library."""

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerance bundle shared by the graph, plant and simulation layers.

    Kept in one record so a caller can tighten or relax the whole stack in
    one place instead of hunting for scattered magic numbers.
    """

    structural_zero: float = 1e-10   # |r^T L| per component, zero-eigenvalue checks
    symmetry: float = 1e-14          # allowed asymmetry of the symmetrized Laplacian
    rank_rel: float = 1e-9           # singular values below rank_rel*sigma_max count as zero
    residual: float = 1e-10          # target residual for regulation-equation solves
    residual_fail: float = 1e-8      # above this a regulation solve is rejected
    hurwitz_margin: float = 1e-9     # eigenvalues must satisfy Re < -hurwitz_margin
    z_guard: float = 1e-9            # lower guard on each agent's own z component
    m_floor: float = 1e-6            # estimated strong convexity below this is unusable
    nonconvex_tol: float = 1e-9      # monotonicity quotient below -tol flags non-convexity


DEFAULT = NumericPolicy()
