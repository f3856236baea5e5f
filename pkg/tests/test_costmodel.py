import numpy as np
import pytest

from oocsim.costexpr import parse_cost_expression
from oocsim.costmodel import (
    CostFunction,
    centralized_minimizer,
    estimate_convexity_constants,
    expression_cost,
    quadratic_cost,
)
from oocsim.errors import NoConvergence, NonConvexDetected, NotPositiveDefinite
from oocsim.scenarios import EXAMPLE1_COSTS, example1, example2

ORACLE_EXAMPLE2 = 0.2859875987409847  # frozen from the damped-Newton oracle


def test_quadratic_scalar_stationary_point():
    cost = quadratic_cost([[0.2]], [-2.0], 1.0)
    assert cost.gradient([5.0])[0] == pytest.approx(0.0, abs=1e-14)
    assert cost.value([0.0]) == pytest.approx(1.0)
    assert cost.m == pytest.approx(0.4)
    assert cost.M == pytest.approx(0.4)
    assert cost.provenance == "analytic"


def test_quadratic_identity_constants():
    cost = quadratic_cost(np.eye(2))
    assert cost.m == pytest.approx(2.0)
    assert cost.M == pytest.approx(2.0)
    np.testing.assert_allclose(cost.gradient([1.0, 2.0]), [2.0, 4.0])


def test_quadratic_rejects_bad_matrices():
    with pytest.raises(NotPositiveDefinite):
        quadratic_cost([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(NotPositiveDefinite):
        quadratic_cost([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NotPositiveDefinite):
        quadratic_cost([[0.0]])


def test_estimate_constant_curvature():
    m, M = estimate_convexity_constants(
        parse_cost_expression("0.2*y^2"), (-10.0, 10.0), samples=500)
    assert m == pytest.approx(0.4, abs=1e-6)
    assert M == pytest.approx(0.4, abs=1e-6)


def test_estimate_two_term_quadratic():
    expr = parse_cost_expression("0.1*(y + 0.3)^2 + 0.2*(y - 2)^2")
    m, M = estimate_convexity_constants(expr, (-10.0, 10.0), samples=500)
    assert m == pytest.approx(0.6, abs=1e-6)
    assert M == pytest.approx(0.6, abs=1e-6)


def test_estimate_quartic_flat_bottom():
    # y^4 is convex with vanishing curvature at 0: no rejection, tiny m
    m, M = estimate_convexity_constants(
        parse_cost_expression("y^4"), (-1.0, 1.0), samples=2000)
    assert m >= 0.0
    assert m < 0.05
    assert M > 1.0


def test_estimate_detects_nonconvexity():
    with pytest.raises(NonConvexDetected):
        estimate_convexity_constants(
            parse_cost_expression("cos(y)"), (-3.0, 3.0), samples=500)
    # non-strict mode reports the observed negative bound instead
    m, _ = estimate_convexity_constants(
        parse_cost_expression("cos(y)"), (-3.0, 3.0), samples=500, strict=False)
    assert m < 0.0


def test_estimate_requires_enough_samples():
    with pytest.raises(ValueError):
        estimate_convexity_constants(
            parse_cost_expression("y^2"), (-1.0, 1.0), samples=10)


def test_expression_cost_wraps_catalogue():
    cost = expression_cost("0.3*y^2/sqrt(y^2 + 5)", box=(-10.0, 10.0))
    value, grad = cost.value_and_gradient([0.0])
    assert value == 0.0
    assert grad.shape == (1,)
    assert cost.provenance == "estimated"


def test_minimizer_two_quadratics_mean_of_centers():
    a, b = -3.0, 7.0
    costs = [quadratic_cost([[0.5]], [-a], 0.0), quadratic_cost([[0.5]], [-b], 0.0)]
    y = centralized_minimizer(costs)
    assert y[0] == pytest.approx((a + b) / 2.0, abs=1e-10)


def test_minimizer_example1_quadratics():
    costs = example1().costs
    y = centralized_minimizer(costs)
    assert y[0] == pytest.approx(0.75, abs=1e-10)
    total = sum(2 * a for a, _, _ in EXAMPLE1_COSTS)
    lin = sum(b for _, b, _ in EXAMPLE1_COSTS)
    assert y[0] == pytest.approx(-lin / total, abs=1e-12)


def test_minimizer_example2_catalogue():
    costs = example2().costs
    y = centralized_minimizer(costs)
    assert abs(y[0] - 0.286) <= 5e-3
    assert y[0] == pytest.approx(ORACLE_EXAMPLE2, abs=1e-9)
    grad_sum = sum(c.gradient(y) for c in costs)
    assert np.linalg.norm(grad_sum) <= 1e-10


def test_minimizer_permutation_invariant():
    costs = example2().costs
    y_fwd = centralized_minimizer(costs)
    y_rev = centralized_minimizer(costs[::-1])
    assert abs(y_fwd[0] - y_rev[0]) <= 1e-9


def test_minimizer_matches_closed_form_quadratics():
    rng = np.random.default_rng(9)
    for q in (1, 2, 3):
        costs = []
        for _ in range(4):
            root = rng.standard_normal((q, q))
            Q = root @ root.T + q * np.eye(q)
            b = rng.standard_normal(q)
            costs.append(quadratic_cost(Q, b, 0.0))
        y = centralized_minimizer(costs)
        G = np.zeros((q, q))
        rhs = np.zeros(q)
        for cost in costs:
            # recover Q + Q^T and b from the gradients
            base = cost.gradient(np.zeros(q))
            rhs -= base
            for k in range(q):
                e = np.zeros(q)
                e[k] = 1.0
                G[:, k] += cost.gradient(e) - base
        closed = np.linalg.solve(G, rhs)
        assert np.abs(y - closed).max() <= 1e-10


def test_minimizer_reports_no_convergence():
    # gradient identically 1 has no root; m is a lie, which is the point
    broken = CostFunction(
        q=1, evaluator=lambda y: (float(y[0]), np.ones(1)), m=1.0, M=1.0,
        provenance="analytic",
    )
    with pytest.raises(NoConvergence):
        centralized_minimizer([broken], max_iter=20)
