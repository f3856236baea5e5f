"""Weighted digraphs, their Laplacian spectra, and Kronecker utilities.

The adjacency convention follows the information-flow reading: ``weights[i, j]
= a_ij > 0`` means there is an edge from node ``j`` to node ``i``, i.e. agent
``i`` can read agent ``j``'s output.  Node indices in edge lists are 1-based;
all matrices and the ``in_neighbors`` helper are 0-based.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadIndex,
    DuplicateEdge,
    NotStronglyConnected,
    NullSpaceDegenerate,
    SelfLoop,
)
from .policy import DEFAULT


@dataclass(frozen=True)
class Digraph:
    """Weighted directed graph of ``n`` nodes.

    Attributes
    ----------
    n : int
        Node count, at least 1.
    weights : ndarray
        (n, n) nonnegative adjacency with an exactly zero diagonal.
    """

    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if self.n < 1:
            raise ValueError("node count must be at least 1")
        if w.shape != (self.n, self.n):
            raise ValueError(f"weights must be ({self.n}, {self.n}), got {w.shape}")
        if (w < 0).any():
            raise ValueError("edge weights must be nonnegative")
        if np.diag(w).any():
            raise SelfLoop("adjacency diagonal must be exactly zero")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def in_neighbors(self, i):
        """0-based indices j with an edge j -> i."""
        return np.flatnonzero(self.weights[i])

    def edge_list(self):
        """Edges as (src, dst, weight) tuples with 1-based node indices."""
        dst, src = np.nonzero(self.weights)
        return [
            (int(s) + 1, int(d) + 1, float(self.weights[d, s]))
            for d, s in zip(dst, src)
        ]


@dataclass(frozen=True)
class SpectralInfo:
    """Spectral data of a strongly connected digraph.

    Attributes
    ----------
    laplacian : ndarray
        (n, n) Laplacian L with zero row sums.
    r : ndarray
        Positive left null vector of L, normalized to sum to one.
    r_min : float
        Smallest component of ``r``.
    lambda2 : float
        Second smallest eigenvalue of the symmetrized Laplacian.
    sym_laplacian : ndarray
        (R L + L^T R) / 2 with R = diag(r); positive semidefinite.
    """

    laplacian: np.ndarray
    r: np.ndarray
    r_min: float
    lambda2: float
    sym_laplacian: np.ndarray


def build_digraph(edges, n):
    """Build a :class:`Digraph` from an edge list.

    Parameters
    ----------
    edges : iterable of (src, dst, weight)
        Directed edges with 1-based node indices and positive weights.
    n : int
        Number of nodes.

    Raises
    ------
    SelfLoop
        If ``src == dst`` for some edge.
    DuplicateEdge
        If the same (src, dst) pair appears twice.
    BadIndex
        If an index is outside 1..n.
    """
    weights = np.zeros((n, n))
    seen = set()
    for src, dst, w in edges:
        if not (1 <= src <= n) or not (1 <= dst <= n):
            raise BadIndex(f"edge ({src}, {dst}) outside 1..{n}")
        if src == dst:
            raise SelfLoop(f"edge ({src}, {dst}) is a self-loop")
        if (src, dst) in seen:
            raise DuplicateEdge(f"edge ({src}, {dst}) given twice")
        if w <= 0:
            raise ValueError(f"edge ({src}, {dst}) has nonpositive weight {w}")
        seen.add((src, dst))
        weights[dst - 1, src - 1] = w
    return Digraph(n=n, weights=weights)


def laplacian(g):
    """Laplacian ``L`` with ``l_ii = sum_j a_ij`` and ``l_ij = -a_ij``.

    The diagonal is computed as the row sum of the off-diagonal weights
    before the off-diagonals are negated, so ``L @ 1`` vanishes by
    construction.
    """
    w = g.weights
    lap = -w.copy()
    np.fill_diagonal(lap, w.sum(axis=1))
    lap += 0.0  # clear negative zeros left by the negation
    return lap


def _out_adjacency(g):
    # out-neighbors of u are the rows that receive weight from column u
    return [np.flatnonzero(g.weights[:, u]).tolist() for u in range(g.n)]


def _in_adjacency(g):
    return [np.flatnonzero(g.weights[u, :]).tolist() for u in range(g.n)]


def is_strongly_connected(g):
    """True iff every ordered node pair is joined by a directed path.

    Two-pass iterative depth-first search (Kosaraju): the first pass records
    finish order on the out-adjacency, the second counts components on the
    in-adjacency.
    """
    n = g.n
    if n == 1:
        return True
    out_adj = _out_adjacency(g)
    in_adj = _in_adjacency(g)

    visited = [False] * n
    order = []
    for start in range(n):
        if visited[start]:
            continue
        stack = [(start, iter(out_adj[start]))]
        visited[start] = True
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if not visited[nxt]:
                    visited[nxt] = True
                    stack.append((nxt, iter(out_adj[nxt])))
                    break
            else:
                order.append(node)
                stack.pop()

    components = 0
    assigned = [False] * n
    for start in reversed(order):
        if assigned[start]:
            continue
        components += 1
        if components > 1:
            return False
        stack = [start]
        assigned[start] = True
        while stack:
            node = stack.pop()
            for nxt in in_adj[node]:
                if not assigned[nxt]:
                    assigned[nxt] = True
                    stack.append(nxt)
    return components == 1


def spectral_info(g, policy=DEFAULT):
    """Left eigenvector and algebraic connectivity data of a digraph.

    ``r`` solves the stacked least-squares system [L^T; 1^T] r = [0; 1],
    which is a single dense solve and well conditioned at the sizes this
    library targets.  ``lambda2`` is the second smallest eigenvalue of
    (R L + L^T R)/2, where the zero eigenvalue is identified as the one of
    minimum absolute value rather than by a threshold.

    Raises
    ------
    NotStronglyConnected
        If the digraph is not strongly connected.
    NullSpaceDegenerate
        If the kernel of L^T is not one-dimensional at tolerance, or the
        computed ``r`` is not strictly positive.
    """
    if not is_strongly_connected(g):
        raise NotStronglyConnected("spectral data requires a strongly connected digraph")
    lap = laplacian(g)
    n = g.n

    sigma = np.linalg.svd(lap.T, compute_uv=False)
    cutoff = policy.rank_rel * max(sigma[0], 1.0)
    null_dim = int(np.sum(sigma < cutoff))
    if null_dim != 1:
        raise NullSpaceDegenerate(
            f"kernel of L^T has dimension {null_dim} at tolerance {cutoff:g}"
        )

    stacked = np.vstack([lap.T, np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    r, *_ = np.linalg.lstsq(stacked, rhs, rcond=None)
    if (r <= 0).any():
        raise NullSpaceDegenerate("left null vector has nonpositive components")

    sym = (np.diag(r) @ lap)
    sym = (sym + sym.T) / 2.0
    eigs = np.linalg.eigvalsh(sym)
    zero_idx = int(np.argmin(np.abs(eigs)))
    rest = np.delete(eigs, zero_idx)
    lambda2 = float(rest.min())

    r.setflags(write=False)
    lap.setflags(write=False)
    sym.setflags(write=False)
    return SpectralInfo(
        laplacian=lap,
        r=r,
        r_min=float(r.min()),
        lambda2=lambda2,
        sym_laplacian=sym,
    )


def kron(e, f):
    """Kronecker product of two matrices."""
    return np.kron(np.asarray(e, dtype=float), np.asarray(f, dtype=float))


def vec(e):
    """Column-stacking of a matrix into a vector."""
    return np.asarray(e, dtype=float).reshape(-1, order="F")
