"""Tests for the coefficient expression language."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randers_curvature import jets
from randers_curvature.exceptions import (
    ArityMismatch,
    ExpressionDomainError,
    ExpressionSyntaxError,
    UnknownIdentifier,
)
from randers_curvature.expr import (
    FUNCTIONS,
    BinaryOp,
    Call,
    Negate,
    Number,
    Power,
    Variable,
    evaluate,
    evaluate_grid,
    parse,
)
from tests.conftest import assert_close, central_gradient, central_hessian


class TestParse:
    """Tests for parse."""

    @pytest.mark.parametrize(
        ("source", "expected"),
        [
            (
                "x1*x1 + 2",
                BinaryOp("+", BinaryOp("*", Variable(0), Variable(0)), Number(2.0)),
            ),
            ("sin(x2)^2", Power(Call("sin", Variable(1)), Number(2.0))),
            ("-x1^2", Negate(Power(Variable(0), Number(2.0)))),
            ("x1 - x2 - 1", BinaryOp("-", BinaryOp("-", Variable(0), Variable(1)), Number(1.0))),
            ("x1/2*x2", BinaryOp("*", BinaryOp("/", Variable(0), Number(2.0)), Variable(1))),
            ("x1^-0.5", Power(Variable(0), Negate(Number(0.5)))),
            ("2.5e-1", Number(0.25)),
        ],
    )
    def test_ast(self, source, expected):
        assert parse(source) == expected

    def test_syntax_error_position(self):
        """The error points at the unexpected token."""
        with pytest.raises(ExpressionSyntaxError) as err:
            parse("x1 +* 2")
        assert err.value.position == 4
        assert "*" in str(err.value)
        assert err.value.expected

    def test_unexpected_end(self):
        with pytest.raises(ExpressionSyntaxError) as err:
            parse("(x1 + 2")
        assert err.value.position == len("(x1 + 2")
        assert "end of input" in str(err.value)

    def test_unexpected_character(self):
        with pytest.raises(ExpressionSyntaxError) as err:
            parse("x1 $ 2")
        assert err.value.position == 3

    @pytest.mark.parametrize("source", ["y1", "x0", "foo + 1", "pi"])
    def test_unknown_identifier(self, source):
        with pytest.raises(UnknownIdentifier):
            parse(source)

    def test_variable_beyond_dimension(self):
        assert parse("x3") == Variable(2)
        with pytest.raises(UnknownIdentifier) as err:
            parse("x1 + x3", dimension=2)
        assert err.value.name == "x3"
        assert err.value.position == 5

    def test_unknown_function(self):
        with pytest.raises(UnknownIdentifier, match="unknown function 'atan'"):
            parse("atan(x1)")

    @pytest.mark.parametrize("source", ["sin(x1, x2)", "cos()"])
    def test_arity(self, source):
        with pytest.raises(ArityMismatch):
            parse(source)

    def test_exponent_must_be_constant(self):
        with pytest.raises(ExpressionSyntaxError, match="must be constant"):
            parse("x1^x2")

    def test_variables(self):
        assert parse("sin(x1) + x3^2").variables() == frozenset({0, 2})
        assert parse("2 + 3").variables() == frozenset()


def _expressions():
    leaves = st.one_of(
        st.integers(min_value=0, max_value=3).map(Variable),
        st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(Number),
    )

    def extend(children):
        return st.one_of(
            st.builds(BinaryOp, st.sampled_from("+-*/"), children, children),
            st.builds(Negate, children),
            st.builds(Call, st.sampled_from(sorted(FUNCTIONS)), children),
            st.builds(
                Power,
                children,
                st.integers(min_value=-3, max_value=4).map(
                    lambda k: Number(float(k)) if k >= 0 else Negate(Number(float(-k)))
                ),
            ),
        )

    return st.recursive(leaves, extend, max_leaves=12)


class TestRoundTrip:
    """Printing then parsing gives back the same tree."""

    @given(_expressions())
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, expression):
        assert parse(expression.to_source()) == expression

    @pytest.mark.parametrize(
        "source",
        ["x1*x1 + 2", "sin(x2)^2", "(1 - (x1^2 + x2^2))", "-x1/(2 + x2)^-1.5", "tanh(ln(x1))"],
    )
    def test_source_round_trip(self, source):
        expression = parse(source)
        assert parse(expression.to_source()) == expression


class TestEvaluate:
    """Tests for evaluation on floats, arrays and jets."""

    @pytest.mark.parametrize(
        ("source", "point", "expected"),
        [
            ("x1*x1 + 2", (3.0,), 11.0),
            ("sin(x2)^2 + cos(x2)^2", (0.0, 0.7), 1.0),
            ("exp(ln(x1))", (2.5,), 2.5),
            ("sqrt(x1) - x1^0.5", (2.0,), 0.0),
            ("tanh(x1)", (0.3,), math.tanh(0.3)),
            ("-x1^2", (3.0,), -9.0),
            ("2^-1", (), 0.5),
        ],
    )
    def test_float(self, source, point, expected):
        assert parse(source).evaluate(point) == pytest.approx(expected, rel=1e-14, abs=1e-14)

    @pytest.mark.parametrize(
        ("source", "point"),
        [
            ("ln(x1)", (0.0,)),
            ("ln(x1)", (-1.0,)),
            ("sqrt(x1)", (-0.1,)),
            ("1/x1", (0.0,)),
            ("x1^-1", (0.0,)),
            ("x1^0.5", (-1.0,)),
        ],
    )
    def test_domain_errors(self, source, point):
        with pytest.raises(ExpressionDomainError) as err:
            parse(source).evaluate(point)
        assert err.value.subexpression

    def test_jet_domain_error(self):
        point = jets.seed([0.0], [0], 2)
        with pytest.raises(ExpressionDomainError):
            evaluate(parse("ln(x1)"), point)

    def test_constant_becomes_jet(self):
        point = jets.seed([0.3, 0.4], [0, 1], 2)
        result = evaluate(parse("2 + 3"), point)
        assert isinstance(result, jets.Jet)
        assert result.value == 5.0
        assert result.derivative(0).value == 0.0

    def test_grid(self):
        points = np.array([[0.0, 1.0], [1.0, 2.0], [2.0, -1.0]])
        np.testing.assert_allclose(evaluate_grid(parse("x1*x2 + 1"), points), [1.0, 3.0, -1.0])
        np.testing.assert_allclose(evaluate_grid(parse("4"), points), [4.0, 4.0, 4.0])


class TestJetEvaluation:
    """Jet evaluation agrees with finite differences of plain evaluation."""

    @pytest.mark.parametrize(
        "source",
        [
            "sin(x1)*exp(x2) + x1^3/(1 + x2^2)",
            "sqrt(2 + x1*x2) - ln(3 + x1)",
            "tanh(x1 - 2*x2)^2 * cos(x2)",
            "(1 + x1^2)^-1.5 + x2^4",
        ],
    )
    def test_gradient_and_hessian(self, source):
        expression = parse(source)
        x = np.array([0.3, -0.2])

        def value(p):
            return expression.evaluate([float(v) for v in p])

        jet = evaluate(expression, jets.seed(x, [0, 1], 2))
        values, gradients, hessians = jets.derivative_arrays([jet])

        assert values[0] == pytest.approx(value(x), rel=1e-14)
        assert_close(gradients[0], central_gradient(value, x))
        assert_close(hessians[0], central_hessian(value, x, h=1e-3), rtol=1e-5, atol=1e-6)
