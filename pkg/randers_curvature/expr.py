"""Coefficient expressions: grammar, AST and evaluation.

Metric coefficients a_ij(x) and b_i(x) are closed-form expressions in the
coordinates x1..xn. The same AST evaluates on floats, on numpy arrays (grid
checks) and on jets (derivatives).
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError
from lark.lexer import PatternStr

from . import jets
from .exceptions import (
    ArityMismatch,
    ExpressionDomainError,
    ExpressionSyntaxError,
    JetDomainError,
    UnknownIdentifier,
)
from .jets import Jet, JetSpace

_LOGGER = logging.getLogger(__name__)

EXPRESSION_GRAMMAR = r"""
    ?start: sum

    ?sum: product
        | sum "+" product       -> add
        | sum "-" product       -> sub

    ?product: unary
        | product "*" unary     -> mul
        | product "/" unary     -> div

    ?unary: power
        | "-" unary             -> neg

    ?power: atom
        | power "^" exponent    -> pow

    ?exponent: atom
        | "-" exponent          -> neg

    ?atom: NUMBER               -> number
        | NAME "(" [sum ("," sum)*] ")" -> call
        | NAME                  -> name
        | "(" sum ")"

    NAME: /[A-Za-z_][A-Za-z0-9_]*/

    %import common.NUMBER
    %import common.WS
    %ignore WS
"""

_PARSER = Lark(EXPRESSION_GRAMMAR, parser="lalr", lexer="basic", maybe_placeholders=False)

_TERMINAL_TEXT = {
    t.name: (t.pattern.value if isinstance(t.pattern, PatternStr) else t.name)
    for t in _PARSER.terminals
}

Value = float | np.ndarray | Jet


def _check_positive(value, what: str) -> str | None:
    if isinstance(value, Jet):
        return None
    if np.any(np.asarray(value) <= 0):
        return f"{what} of a non-positive value"
    return None


def _check_non_negative(value, what: str) -> str | None:
    if isinstance(value, Jet):
        return None
    if np.any(np.asarray(value) < 0):
        return f"{what} of a negative value"
    return None


@dataclass(frozen=True)
class _Function:
    jet: Callable[[Jet], Jet]
    numeric: Callable
    domain: Callable[[Value, str], str | None] | None = None


FUNCTIONS: dict[str, _Function] = {
    "sin": _Function(jets.sin, np.sin),
    "cos": _Function(jets.cos, np.cos),
    "exp": _Function(jets.exp, np.exp),
    "ln": _Function(jets.ln, np.log, _check_positive),
    "sqrt": _Function(jets.sqrt, np.sqrt, _check_non_negative),
    "tanh": _Function(jets.tanh, np.tanh),
}


class Expression:
    """Base class of expression AST nodes."""

    def to_source(self) -> str:
        raise NotImplementedError

    def evaluate(self, point: Sequence[Value]) -> Value:
        raise NotImplementedError

    def variables(self) -> frozenset[int]:
        return frozenset()

    def __str__(self) -> str:
        return self.to_source()


@dataclass(frozen=True)
class Number(Expression):
    value: float

    def to_source(self) -> str:
        return repr(float(self.value))

    def evaluate(self, point):
        return self.value


@dataclass(frozen=True)
class Variable(Expression):
    index: int  # 0-based; printed as x1, x2, ...

    def to_source(self) -> str:
        return f"x{self.index + 1}"

    def evaluate(self, point):
        return point[self.index]

    def variables(self) -> frozenset[int]:
        return frozenset({self.index})


@dataclass(frozen=True)
class Negate(Expression):
    operand: Expression

    def to_source(self) -> str:
        return f"(-{self.operand.to_source()})"

    def evaluate(self, point):
        return -self.operand.evaluate(point)

    def variables(self) -> frozenset[int]:
        return self.operand.variables()


@dataclass(frozen=True)
class BinaryOp(Expression):
    op: str
    left: Expression
    right: Expression

    def to_source(self) -> str:
        return f"({self.left.to_source()} {self.op} {self.right.to_source()})"

    def evaluate(self, point):
        left = self.left.evaluate(point)
        right = self.right.evaluate(point)

        match self.op:
            case "+":
                return left + right
            case "-":
                return left - right
            case "*":
                return left * right
            case "/":
                if not isinstance(right, Jet) and np.any(np.asarray(right) == 0):
                    raise ExpressionDomainError(
                        f"division by zero in {self.to_source()}", self.to_source()
                    )
                try:
                    return left / right
                except JetDomainError as e:
                    raise ExpressionDomainError(f"{e} in {self.to_source()}", self.to_source())

        raise ValueError(f"unknown operator {self.op!r}")

    def variables(self) -> frozenset[int]:
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True)
class Power(Expression):
    base: Expression
    exponent: Expression  # constant

    def to_source(self) -> str:
        return f"({self.base.to_source()}^{self.exponent.to_source()})"

    def evaluate(self, point):
        base = self.base.evaluate(point)
        p = float(self.exponent.evaluate(()))

        if isinstance(base, Jet):
            try:
                return jets.power(base, p)
            except JetDomainError as e:
                raise ExpressionDomainError(f"{e} in {self.to_source()}", self.to_source())

        values = np.asarray(base, dtype=float)
        if p < 0 and np.any(values == 0):
            raise ExpressionDomainError(
                f"negative power of zero in {self.to_source()}", self.to_source()
            )
        if not p.is_integer() and np.any(values < 0):
            raise ExpressionDomainError(
                f"non-integer power of a negative value in {self.to_source()}",
                self.to_source(),
            )
        return np.power(base, p) if isinstance(base, np.ndarray) else float(base) ** p

    def variables(self) -> frozenset[int]:
        return self.base.variables()


@dataclass(frozen=True)
class Call(Expression):
    function: str
    argument: Expression

    def to_source(self) -> str:
        return f"{self.function}({self.argument.to_source()})"

    def evaluate(self, point):
        function = FUNCTIONS[self.function]
        argument = self.argument.evaluate(point)

        if isinstance(argument, Jet):
            try:
                return function.jet(argument)
            except JetDomainError as e:
                raise ExpressionDomainError(f"{e} in {self.to_source()}", self.to_source())

        if function.domain is not None and (reason := function.domain(argument, self.function)):
            raise ExpressionDomainError(f"{reason} in {self.to_source()}", self.to_source())

        result = function.numeric(argument)
        return result if isinstance(result, np.ndarray) else float(result)

    def variables(self) -> frozenset[int]:
        return self.argument.variables()


def _is_constant(node: Expression) -> bool:
    return not node.variables()


@v_args(inline=True)
class _AstBuilder(Transformer):
    def __init__(self, dimension: int | None) -> None:
        super().__init__()
        self.dimension = dimension

    def number(self, token: Token) -> Number:
        return Number(float(token))

    def name(self, token: Token) -> Variable:
        text = str(token)
        if text.startswith("x") and text[1:].isdigit() and int(text[1:]) >= 1:
            index = int(text[1:]) - 1
            if self.dimension is None or index < self.dimension:
                return Variable(index)
            raise UnknownIdentifier(
                f"variable '{text}' at position {token.start_pos} exceeds dimension {self.dimension}",
                text,
                token.start_pos,
            )
        raise UnknownIdentifier(
            f"unknown identifier '{text}' at position {token.start_pos}", text, token.start_pos
        )

    def call(self, token: Token, *arguments: Expression) -> Call:
        text = str(token)
        if text not in FUNCTIONS:
            raise UnknownIdentifier(
                f"unknown function '{text}' at position {token.start_pos}", text, token.start_pos
            )
        if len(arguments) != 1:
            raise ArityMismatch(
                f"function '{text}' takes 1 argument, got {len(arguments)} at position {token.start_pos}"
            )
        return Call(text, arguments[0])

    def add(self, left, right) -> BinaryOp:
        return BinaryOp("+", left, right)

    def sub(self, left, right) -> BinaryOp:
        return BinaryOp("-", left, right)

    def mul(self, left, right) -> BinaryOp:
        return BinaryOp("*", left, right)

    def div(self, left, right) -> BinaryOp:
        return BinaryOp("/", left, right)

    def neg(self, operand) -> Negate:
        return Negate(operand)

    def pow(self, base, exponent) -> Power:
        if not _is_constant(exponent):
            raise ExpressionSyntaxError(
                f"exponent '{exponent.to_source()}' must be constant", position=None
            )
        return Power(base, exponent)


def _syntax_error(source: str, err: UnexpectedInput) -> ExpressionSyntaxError:
    if isinstance(err, UnexpectedToken):
        token = err.token
        at_end = token.type == "$END"
        position = len(source) if at_end else token.start_pos
        found = "end of input" if at_end else repr(str(token))
        expected = tuple(sorted(_TERMINAL_TEXT.get(name, name) for name in err.expected))
    elif isinstance(err, UnexpectedCharacters):
        position = err.pos_in_stream
        found = repr(source[position])
        expected = tuple(sorted(_TERMINAL_TEXT.get(name, name) for name in err.allowed or ()))
    else:
        position = len(source)
        found = "end of input"
        expected = ()

    message = f"unexpected {found} at position {position}"
    if expected:
        message += f"; expected one of: {', '.join(expected)}"
    return ExpressionSyntaxError(message, position, expected)


def parse(source: str, dimension: int | None = None) -> Expression:
    """Parse a coefficient expression over x1..x{dimension}."""
    try:
        tree = _PARSER.parse(source)
    except UnexpectedInput as err:
        raise _syntax_error(source, err)

    try:
        return _AstBuilder(dimension).transform(tree)
    except VisitError as err:
        raise err.orig_exc


def evaluate(expression: Expression, point: Sequence[Value]) -> Value:
    """Evaluate at `point`; with jet coordinates the result is always a Jet."""
    result = expression.evaluate(point)
    spaces = {p.space for p in point if isinstance(p, Jet)}
    if spaces and not isinstance(result, Jet):
        space: JetSpace = spaces.pop()
        return Jet.constant(space, float(result))
    return result


def evaluate_grid(expression: Expression, points: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over points of shape (P, n)."""
    columns = [points[:, i] for i in range(points.shape[1])]
    result = expression.evaluate(columns)
    return np.broadcast_to(np.asarray(result, dtype=float), (points.shape[0],)).copy()
