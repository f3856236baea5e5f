"""Local cost functions: values, gradients, convexity constants, and the
centralized minimizer used as the oracle for distributed runs."""

from dataclasses import dataclass

import numpy as np

from .costexpr import CostExpr, parse_cost_expression
from .errors import NoConvergence, NonConvexDetected, NotPositiveDefinite
from .policy import DEFAULT


@dataclass(frozen=True)
class CostFunction:
    """Differentiable local cost on R^q.

    Attributes
    ----------
    q : int
        Output dimension the cost is defined on.
    evaluator : callable
        Maps a length-q vector to ``(value, gradient)``.
    m : float
        Strong-convexity constant (lower gradient-monotonicity bound).
        Positive for convex costs; estimated costs may carry the observed
        bound even when it is not positive.
    M : float
        Gradient Lipschitz constant (upper bound), ``m <= M``.
    provenance : str
        Either ``"analytic"`` or ``"estimated"``.
    """

    q: int
    evaluator: callable
    m: float
    M: float
    provenance: str

    def __post_init__(self):
        if self.m > self.M + 1e-12:
            raise ValueError(f"m = {self.m} exceeds M = {self.M}")
        if self.provenance not in ("analytic", "estimated"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def value_and_gradient(self, y):
        return self.evaluator(np.asarray(y, dtype=float).reshape(self.q))

    def value(self, y):
        return self.value_and_gradient(y)[0]

    def gradient(self, y):
        return self.value_and_gradient(y)[1]


def quadratic_cost(Q, b=None, c=0.0):
    """Quadratic cost f(y) = y^T Q y + b^T y + c with analytic constants.

    Parameters
    ----------
    Q : array_like
        Symmetric positive definite (q, q) matrix; a scalar is treated as
        a 1x1 matrix.
    b : array_like, optional
        Length-q linear coefficient, default zero.
    c : float, optional
        Constant offset.

    Returns
    -------
    CostFunction
        With gradient (Q + Q^T) y + b, m = 2 lambda_min(Q) and
        M = 2 lambda_max(Q).

    Raises
    ------
    NotPositiveDefinite
        If Q is not symmetric or has an eigenvalue <= 0.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    q = Q.shape[0]
    if Q.shape != (q, q):
        raise ValueError(f"Q must be square, got {Q.shape}")
    if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12):
        raise NotPositiveDefinite("Q must be symmetric")
    eigs = np.linalg.eigvalsh(Q)
    if eigs[0] <= 0.0:
        raise NotPositiveDefinite(f"Q has eigenvalue {eigs[0]:g} <= 0")
    b = np.zeros(q) if b is None else np.asarray(b, dtype=float).reshape(q)
    c = float(c)
    G = Q + Q.T

    def evaluator(y):
        return float(y @ Q @ y + b @ y + c), G @ y + b

    return CostFunction(
        q=q,
        evaluator=evaluator,
        m=2.0 * float(eigs[0]),
        M=2.0 * float(eigs[-1]),
        provenance="analytic",
    )


def expression_cost(source, box=(-10.0, 10.0), samples=500, seed=0):
    """Wrap an expression string or :class:`CostExpr` as a scalar cost.

    Convexity constants are sampled estimates over ``box``; costs that turn
    out non-convex on the box are still wrapped (the observed, possibly
    negative, lower bound is recorded) so that benchmark catalogues with
    locally non-convex members remain representable.  Anything that consumes
    ``m`` downstream must reject non-positive values itself.
    """
    expr = parse_cost_expression(source) if isinstance(source, str) else source
    m, M = estimate_convexity_constants(expr, box, samples=samples, seed=seed, strict=False)

    def evaluator(y):
        v, d = expr.value_and_derivative(y[0])
        return v, np.array([d])

    return CostFunction(q=1, evaluator=evaluator, m=m, M=M, provenance="estimated")


def _gradient_of(cost):
    if isinstance(cost, CostExpr):
        return 1, lambda y: np.array([cost.derivative(y[0])])
    return cost.q, cost.gradient


def estimate_convexity_constants(cost, box, samples=500, seed=0, strict=True,
                                 policy=DEFAULT):
    """Sampled gradient-monotonicity bounds of a cost over a box.

    Draws ``samples`` point pairs (x, y) uniformly from ``box`` and returns

        m = min (x - y)^T (grad(x) - grad(y)) / ||x - y||^2
        M = max ||grad(x) - grad(y)|| / ||x - y||

    Parameters
    ----------
    cost : CostFunction or CostExpr
    box : pair or sequence of pairs
        (lo, hi) per coordinate; a single pair is broadcast.
    samples : int
        Number of sampled pairs, at least 100.
    strict : bool
        When true (the default), a monotonicity quotient below the policy's
        non-convexity tolerance raises; when false the observed minimum is
        returned so callers can report it.

    Raises
    ------
    NonConvexDetected
        In strict mode, if any sampled pair has a negative quotient beyond
        tolerance.
    """
    if samples < 100:
        raise ValueError("need at least 100 sampled pairs")
    q, grad = _gradient_of(cost)
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        box = np.tile(box, (q, 1))
    if box.shape != (q, 2) or (box[:, 1] <= box[:, 0]).any():
        raise ValueError("box must be a nonempty (lo, hi) interval per coordinate")

    rng = np.random.default_rng(seed)
    lo, hi = box[:, 0], box[:, 1]
    xs = rng.uniform(lo, hi, size=(samples, q))
    ys = rng.uniform(lo, hi, size=(samples, q))

    m = np.inf
    M = 0.0
    scale = float(np.max(hi - lo))
    for x, y in zip(xs, ys):
        diff = x - y
        dist2 = float(diff @ diff)
        if dist2 < (1e-8 * scale) ** 2:
            continue
        dg = grad(x) - grad(y)
        quot = float(diff @ dg) / dist2
        ratio = float(np.linalg.norm(dg)) / np.sqrt(dist2)
        m = min(m, quot)
        M = max(M, ratio)
    if strict and m < -policy.nonconvex_tol:
        raise NonConvexDetected(
            f"monotonicity quotient {m:g} negative beyond tolerance on the box"
        )
    return float(m), float(M)


def aggregate_gradient(costs):
    """Gradient of the summed cost as a single callable."""
    grads = [c.gradient for c in costs]

    def total(y):
        g = grads[0](y).copy()
        for grad in grads[1:]:
            g += grad(y)
        return g

    return total


def centralized_minimizer(costs, y0=None, tol=1e-10, max_iter=100):
    """Minimizer of the summed cost, used as the oracle for distributed runs.

    Damped Newton iteration on the aggregate gradient with a
    finite-difference Jacobian; backtracking falls through to plain gradient
    steps whenever the Newton direction fails to shrink the residual.

    Returns
    -------
    ndarray
        Point y* with ``||sum_i grad f_i(y*)|| <= tol``.

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations; this normally signals mis-specified
        costs (no strongly convex aggregate).
    """
    q = costs[0].q
    if any(c.q != q for c in costs):
        raise ValueError("all costs must share the output dimension q")
    total = aggregate_gradient(costs)
    y = np.zeros(q) if y0 is None else np.asarray(y0, dtype=float).reshape(q).copy()

    g = total(y)
    for _ in range(max_iter):
        norm = float(np.linalg.norm(g))
        if norm <= tol:
            return y
        jac = np.empty((q, q))
        for k in range(q):
            h = 1e-6 * max(1.0, abs(y[k]))
            ek = np.zeros(q)
            ek[k] = h
            jac[:, k] = (total(y + ek) - total(y - ek)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, g)
        except np.linalg.LinAlgError:
            step = g
        lam = 1.0
        for _ in range(40):
            cand = y - lam * step
            gc = total(cand)
            if float(np.linalg.norm(gc)) < norm:
                y, g = cand, gc
                break
            lam *= 0.5
        else:
            # Newton direction unusable; damped gradient step
            lam = 1.0 / max(1.0, float(np.linalg.norm(jac, 2)))
            y = y - lam * g
            g = total(y)
    if float(np.linalg.norm(g)) <= tol:
        return y
    raise NoConvergence(
        f"minimizer stalled at ||sum grad|| = {float(np.linalg.norm(g)):g} after {max_iter} iterations"
    )
