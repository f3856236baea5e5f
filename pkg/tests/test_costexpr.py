import math

import numpy as np
import pytest

from oocsim.costexpr import parse_cost_expression
from oocsim.errors import DomainError, ParseError

EXAMPLE_EXPRESSIONS = [
    "sin(0.2*y - (pi/2))",
    "0.2*cos(ln(y^2 + 4) - 0.2)",
    "0.1*(y + 0.3)^2 + 0.2*(y - 2)^2",
    "0.4*y^2*ln(5 + y^2)",
    "0.2*y^2*(ln(y^2 + 1) + 1)",
    "0.3*y^2/sqrt(y^2 + 5)",
]


def test_quadratic_value():
    expr = parse_cost_expression("0.2*y^2 - 2*y + 1")
    assert expr.value(0.0) == pytest.approx(1.0, abs=0.0)
    assert expr.value(5.0) == pytest.approx(0.2 * 25 - 10 + 1)
    assert expr.derivative(5.0) == pytest.approx(0.0, abs=1e-14)


def test_sqrt_ratio_value_at_zero():
    expr = parse_cost_expression("0.3*y^2/sqrt(y^2+5)")
    assert expr.value(0.0) == 0.0


def test_shifted_sine_derivative_at_zero():
    expr = parse_cost_expression("sin(0.2*y - (pi/2))")
    # chain rule gives 0.2 cos(-pi/2) = 0
    assert expr.derivative(0.0) == pytest.approx(0.0, abs=1e-15)


def test_constants_and_precedence():
    assert parse_cost_expression("pi").value(0.0) == math.pi
    assert parse_cost_expression("e").value(0.0) == math.e
    assert parse_cost_expression("2*y^2").value(3.0) == 18.0
    assert parse_cost_expression("-y^2").value(2.0) == -4.0
    assert parse_cost_expression("2^y").value(3.0) == 8.0
    assert parse_cost_expression("2 - 3 - 4").value(0.0) == -5.0
    assert parse_cost_expression("12/3/2").value(0.0) == 2.0
    assert parse_cost_expression("1e-2*y").value(10.0) == pytest.approx(0.1)


def test_integer_power_on_negative_base():
    expr = parse_cost_expression("y^3")
    assert expr.value(-2.0) == -8.0
    assert expr.derivative(-2.0) == 12.0


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as err:
        parse_cost_expression("0.2*y +")
    assert err.value.position == 7
    with pytest.raises(ParseError):
        parse_cost_expression("sin(y")
    with pytest.raises(ParseError) as err:
        parse_cost_expression("2*foo(y)")
    assert "foo" in str(err.value)
    with pytest.raises(ParseError):
        parse_cost_expression("2 y")
    with pytest.raises(ParseError):
        parse_cost_expression("abs(y)")  # deliberately not in the language


def test_domain_errors_surface_lazily():
    expr = parse_cost_expression("ln(y)")
    assert expr.value(2.0) == pytest.approx(math.log(2.0))
    with pytest.raises(DomainError):
        expr.value(-1.0)
    with pytest.raises(DomainError):
        parse_cost_expression("1/y").value(0.0)
    with pytest.raises(DomainError):
        parse_cost_expression("sqrt(y)").value(-4.0)
    with pytest.raises(DomainError):
        parse_cost_expression("y^0.5").value(-1.0)
    with pytest.raises(DomainError):
        parse_cost_expression("y^y").value(-1.0)


def test_vector_dimension_rejected():
    with pytest.raises(ValueError):
        parse_cost_expression("y", q=2)


def central_difference(expr, y, h=1e-6):
    return (expr.value(y + h) - expr.value(y - h)) / (2.0 * h)


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(42)
    catalogue = EXAMPLE_EXPRESSIONS + [
        "y^4", "sqrt(y^2 + 1)", "cos(y)*sin(y)", "e^(0*y) + y/3",
        "(y + 1)*(y - 1)", "2^y",
    ]
    points = rng.uniform(-8.0, 8.0, size=1000)
    for text in catalogue:
        expr = parse_cost_expression(text)
        for y in points[:1000 // len(catalogue) * len(catalogue)]:
            d = expr.derivative(float(y))
            fd = central_difference(expr, float(y))
            assert abs(d - fd) <= 1e-6 * max(1.0, abs(d)), (text, y, d, fd)
