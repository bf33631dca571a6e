"""Truncated multivariate Taylor arithmetic (jets).

A jet holds the Taylor coefficients of a scalar function at one point. Its
variables are split into groups, and each group has its own truncation order:
a coefficient is kept for every multi-index whose degree inside each group is
at most that group's order. The phase-space pipeline uses two groups (x then
y) so that x- and y-derivatives can be taken independently.

Coefficients are Taylor-normalized (derivative divided by the multi-index
factorial). `extract` multiplies the factorials back in.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from numbers import Real

import numpy as np
from numpy.polynomial import polynomial as P

from .const import JetBudget
from .exceptions import (
    JetDomainError,
    JetError,
    JetSpaceMismatch,
    MultiIndexOutOfRange,
    UnsupportedJetOrder,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class JetSpace:
    """Variable groups as (variable count, truncation order) pairs."""

    groups: tuple[tuple[int, int], ...]

    @classmethod
    def single(cls, count: int, order: int) -> JetSpace:
        return cls(((count, order),))

    @classmethod
    def phase(cls, n: int, x_order: int, y_order: int) -> JetSpace:
        return cls(((n, x_order), (n, y_order)))

    @property
    def nvars(self) -> int:
        return sum(count for count, _ in self.groups)

    @property
    def total_order(self) -> int:
        return sum(order for _, order in self.groups)

    @property
    def size(self) -> int:
        return len(_tables(self).factorials)

    def orders(self) -> tuple[int, ...]:
        return tuple(order for _, order in self.groups)

    def group_of(self, var: int) -> int:
        offset = 0
        for position, (count, _) in enumerate(self.groups):
            if 0 <= var - offset < count:
                return position
            offset += count
        raise MultiIndexOutOfRange(
            f"variable {var} is outside a {self.nvars}-variable jet space"
        )

    def with_order(self, position: int, order: int) -> JetSpace:
        groups = list(self.groups)
        groups[position] = (groups[position][0], order)
        return JetSpace(tuple(groups))


@dataclass(frozen=True)
class _SpaceTables:
    indices: np.ndarray
    lookup: dict[tuple[int, ...], int]
    factorials: np.ndarray
    # product table: coefficient pair_left * coefficient pair_right -> pair_target
    pair_left: np.ndarray
    pair_right: np.ndarray
    pair_target: np.ndarray


def _group_monomials(count: int, order: int) -> list[tuple[int, ...]]:
    monomials = []
    for degree in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(count), degree):
            exponents = [0] * count
            for var in combo:
                exponents[var] += 1
            monomials.append(tuple(exponents))
    return monomials


@lru_cache(maxsize=None)
def _tables(space: JetSpace) -> _SpaceTables:
    per_group = [_group_monomials(count, order) for count, order in space.groups]
    indices = [
        tuple(itertools.chain.from_iterable(parts))
        for parts in itertools.product(*per_group)
    ]
    lookup = {multi: slot for slot, multi in enumerate(indices)}

    # Slots are laid out in mixed radix over the groups, so the product table
    # is the cartesian product of the per-group tables.
    left = np.zeros(1, dtype=np.intp)
    right = np.zeros(1, dtype=np.intp)
    target = np.zeros(1, dtype=np.intp)
    for monomials in per_group:
        local = {multi: slot for slot, multi in enumerate(monomials)}
        a_idx, b_idx, c_idx = [], [], []
        for i, first in enumerate(monomials):
            for j, second in enumerate(monomials):
                k = local.get(tuple(p + q for p, q in zip(first, second)))
                if k is not None:
                    a_idx.append(i)
                    b_idx.append(j)
                    c_idx.append(k)
        size = len(monomials)
        left = (left[:, None] * size + np.asarray(a_idx)[None, :]).ravel()
        right = (right[:, None] * size + np.asarray(b_idx)[None, :]).ravel()
        target = (target[:, None] * size + np.asarray(c_idx)[None, :]).ravel()

    factorials = np.array(
        [math.prod(math.factorial(e) for e in multi) for multi in indices],
        dtype=float,
    )
    _LOGGER.debug(f"Built jet tables for {space.groups}: {len(indices)} slots")

    return _SpaceTables(
        indices=np.array(indices, dtype=np.intp).reshape(len(indices), space.nvars),
        lookup=lookup,
        factorials=factorials,
        pair_left=left,
        pair_right=right,
        pair_target=target,
    )


@lru_cache(maxsize=None)
def _derivative_map(space: JetSpace, var: int) -> tuple[JetSpace, np.ndarray, np.ndarray]:
    position = space.group_of(var)
    order = space.groups[position][1]
    if order == 0:
        raise UnsupportedJetOrder(
            f"cannot differentiate in variable {var}: its group has order 0"
        )

    target = space.with_order(position, order - 1)
    shifted = _tables(target).indices.copy()
    shifted[:, var] += 1
    lookup = _tables(space).lookup
    source = np.array([lookup[tuple(row)] for row in shifted], dtype=np.intp)
    return target, source, shifted[:, var].astype(float)


@lru_cache(maxsize=None)
def _transfer_map(source: JetSpace, target: JetSpace) -> tuple[np.ndarray, np.ndarray]:
    shared = len(source.groups)
    if len(target.groups) < shared or any(
        s[0] != t[0] for s, t in zip(source.groups, target.groups)
    ):
        raise JetSpaceMismatch(
            f"cannot move a jet from {source.groups} to {target.groups}"
        )
    if any(t[1] > s[1] for s, t in zip(source.groups, target.groups)):
        raise UnsupportedJetOrder(
            f"cannot raise truncation orders from {source.groups} to {target.groups}"
        )

    pad = (0,) * (target.nvars - source.nvars)
    lookup = _tables(target).lookup
    src, dst = [], []
    for slot, multi in enumerate(_tables(source).indices):
        k = lookup.get(tuple(int(e) for e in multi) + pad)
        if k is not None:
            src.append(slot)
            dst.append(k)
    return np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp)


class Jet:
    """Truncated Taylor expansion of a scalar function over a JetSpace."""

    __slots__ = ("space", "coefficients")

    # numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, space: JetSpace, coefficients: np.ndarray) -> None:
        if coefficients.shape != (space.size,):
            raise JetSpaceMismatch(
                f"{coefficients.shape[0]} coefficients for a space with {space.size} slots"
            )
        self.space = space
        self.coefficients = coefficients

    @classmethod
    def constant(cls, space: JetSpace, value: float) -> Jet:
        coefficients = np.zeros(space.size)
        coefficients[0] = value
        return cls(space, coefficients)

    @classmethod
    def variable(cls, space: JetSpace, var: int, value: float) -> Jet:
        """The coordinate function `var` expanded at `value`."""
        jet = cls.constant(space, value)
        unit = [0] * space.nvars
        unit[var] = 1
        slot = _tables(space).lookup.get(tuple(unit))
        if slot is not None:
            jet.coefficients[slot] = 1.0
        return jet

    @property
    def value(self) -> float:
        return float(self.coefficients[0])

    def __repr__(self) -> str:
        return f"Jet({self.space.groups}, value={self.value!r})"

    def _check(self, other: Jet) -> None:
        if other.space != self.space:
            raise JetSpaceMismatch(
                f"jets over {self.space.groups} and {other.space.groups} cannot be combined"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.space, self.coefficients + other.coefficients)
        if isinstance(other, Real):
            coefficients = self.coefficients.copy()
            coefficients[0] += other
            return Jet(self.space, coefficients)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> Jet:
        return Jet(self.space, -self.coefficients)

    def __sub__(self, other):
        if isinstance(other, Jet | Real):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Real):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            t = _tables(self.space)
            product = np.bincount(
                t.pair_target,
                weights=self.coefficients[t.pair_left] * other.coefficients[t.pair_right],
                minlength=self.space.size,
            )
            return Jet(self.space, product)
        if isinstance(other, Real):
            return Jet(self.space, self.coefficients * float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        if isinstance(other, Real):
            if other == 0:
                raise JetDomainError("division by zero")
            return Jet(self.space, self.coefficients / float(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Real):
            return reciprocal(self) * other
        return NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, Real):
            return power(self, exponent)
        return NotImplemented

    def derivative(self, var: int) -> Jet:
        """Partial derivative in `var`; that group's order drops by one."""
        target, source, factor = _derivative_map(self.space, var)
        return Jet(target, self.coefficients[source] * factor)

    def to_space(self, space: JetSpace) -> Jet:
        """Truncate to lower orders, or embed into a space with extra groups.

        Variables of appended groups are ones the jet does not depend on.
        """
        if space == self.space:
            return self
        src, dst = _transfer_map(self.space, space)
        coefficients = np.zeros(space.size)
        coefficients[dst] = self.coefficients[src]
        return Jet(space, coefficients)

    def partial(self, multi: Sequence[int]) -> float:
        """The mixed partial derivative for `multi` (one exponent per variable)."""
        multi = tuple(int(e) for e in multi)
        if len(multi) != self.space.nvars or min(multi, default=0) < 0:
            raise MultiIndexOutOfRange(
                f"multi-index {multi} does not fit a {self.space.nvars}-variable jet"
            )
        t = _tables(self.space)
        slot = t.lookup.get(multi)
        if slot is None:
            raise MultiIndexOutOfRange(
                f"multi-index {multi} exceeds the truncation orders {self.space.orders()}"
            )
        return float(self.coefficients[slot] * t.factorials[slot])


def extract(jet: Jet, multi: Sequence[int]) -> float:
    return jet.partial(multi)


def coordinates(space: JetSpace, point: Sequence[float], first_var: int = 0) -> list[Jet]:
    """Coordinate jets for `point`, bound to variables first_var, first_var + 1, ..."""
    return [Jet.variable(space, first_var + i, float(v)) for i, v in enumerate(point)]


def seed(point: Sequence[float], active: Iterable[int], order: int) -> list[Jet]:
    """Jets of the coordinates at `point`; only `active` coordinates vary.

    The jet space has one group holding the active coordinates in the given
    order; inactive coordinates become constants.
    """
    if not 1 <= order <= JetBudget.SEED_MAX_ORDER:
        raise UnsupportedJetOrder(
            f"seed order must be between 1 and {int(JetBudget.SEED_MAX_ORDER)}, got {order}"
        )

    active = list(active)
    if not active:
        raise JetError("seed needs at least one active coordinate")
    if any(not 0 <= i < len(point) for i in active) or len(set(active)) != len(active):
        raise MultiIndexOutOfRange(
            f"active coordinates {active} do not fit a {len(point)}-point"
        )

    space = JetSpace.single(len(active), order)
    return [
        Jet.variable(space, active.index(i), v) if i in active else Jet.constant(space, v)
        for i, v in enumerate(float(p) for p in point)
    ]


def seed_phase(
    x: Sequence[float], y: Sequence[float], x_order: int, y_order: int
) -> tuple[JetSpace, list[Jet], list[Jet]]:
    """Seed a phase-space point (x, y) with independent x and y orders."""
    if not 0 <= x_order <= JetBudget.MAX_X_ORDER:
        raise UnsupportedJetOrder(
            f"x order must be between 0 and {int(JetBudget.MAX_X_ORDER)}, got {x_order}"
        )
    if not 0 <= y_order <= JetBudget.MAX_Y_ORDER:
        raise UnsupportedJetOrder(
            f"y order must be between 0 and {int(JetBudget.MAX_Y_ORDER)}, got {y_order}"
        )
    if len(x) != len(y):
        raise JetSpaceMismatch(f"x has {len(x)} components but y has {len(y)}")

    space = JetSpace.phase(len(x), x_order, y_order)
    return space, coordinates(space, x), coordinates(space, y, first_var=len(x))


def _compose(u: Jet, series: Sequence[float]) -> Jet:
    """sum_k series[k] (u - u(0))^k, exact up to the truncation orders."""
    h = u - u.value
    result = Jet.constant(u.space, series[-1])
    for c in reversed(series[:-1]):
        result = result * h + c
    return result


def _power_series(u0: float, p: float, order: int) -> list[float]:
    series = [u0**p]
    for k in range(1, order + 1):
        series.append(series[-1] * (p - k + 1) / (k * u0))
    return series


def _integer_power(u: Jet, k: int) -> Jet:
    result = Jet.constant(u.space, 1.0)
    base = u
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def power(u: Jet, p: float) -> Jet:
    p = float(p)
    if p.is_integer() and p >= 0:
        return _integer_power(u, int(p))

    u0 = u.value
    if u0 == 0:
        raise JetDomainError(f"power {p!r} of a jet with value 0")
    if u0 < 0 and not p.is_integer():
        raise JetDomainError(f"non-integer power {p!r} of a negative value")
    return _compose(u, _power_series(u0, p, u.space.total_order))


def reciprocal(u: Jet) -> Jet:
    if u.value == 0:
        raise JetDomainError("division by zero")
    return _compose(u, _power_series(u.value, -1.0, u.space.total_order))


def sqrt(u: Jet) -> Jet:
    if u.value <= 0:
        raise JetDomainError(f"sqrt of non-positive value {u.value!r}")
    return _compose(u, _power_series(u.value, 0.5, u.space.total_order))


def ln(u: Jet) -> Jet:
    u0 = u.value
    if u0 <= 0:
        raise JetDomainError(f"ln of non-positive value {u0!r}")
    order = u.space.total_order
    series = [math.log(u0)]
    series += [(-1) ** (k + 1) / (k * u0**k) for k in range(1, order + 1)]
    return _compose(u, series)


def exp(u: Jet) -> Jet:
    e = math.exp(u.value)
    return _compose(u, [e / math.factorial(k) for k in range(u.space.total_order + 1)])


def sin(u: Jet) -> Jet:
    s, c = math.sin(u.value), math.cos(u.value)
    cycle = (s, c, -s, -c)
    order = u.space.total_order
    return _compose(u, [cycle[k % 4] / math.factorial(k) for k in range(order + 1)])


def cos(u: Jet) -> Jet:
    s, c = math.sin(u.value), math.cos(u.value)
    cycle = (c, -s, -c, s)
    order = u.space.total_order
    return _compose(u, [cycle[k % 4] / math.factorial(k) for k in range(order + 1)])


def tanh(u: Jet) -> Jet:
    # d/du P_k(tanh u) = P_k'(t) (1 - t^2), starting from P_0(t) = t
    t = math.tanh(u.value)
    poly = np.array([0.0, 1.0])
    series = []
    for k in range(u.space.total_order + 1):
        series.append(float(P.polyval(t, poly)) / math.factorial(k))
        poly = P.polymul(P.polyder(poly), [1.0, 0.0, -1.0])
    return _compose(u, series)


def _as_jet(value: Jet | float, space: JetSpace) -> Jet:
    return value if isinstance(value, Jet) else Jet.constant(space, float(value))


def _eliminate(
    matrix: Sequence[Sequence[Jet]], rhs: Sequence[Jet] | None
) -> tuple[list[list[Jet]], list[Jet], int]:
    n = len(matrix)
    space = next(e.space for row in matrix for e in row if isinstance(e, Jet))
    rows = [[_as_jet(e, space) for e in row] for row in matrix]
    if rhs is not None:
        for row, value in zip(rows, rhs):
            row.append(_as_jet(value, space))

    pivots = []
    swaps = 0
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(rows[r][col].value))
        if rows[pivot][col].value == 0:
            raise JetDomainError("singular matrix")
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            swaps += 1
        inverse = reciprocal(rows[col][col])
        pivots.append(inverse)
        for r in range(col + 1, n):
            factor = rows[r][col] * inverse
            for c in range(col + 1, len(rows[r])):
                rows[r][c] = rows[r][c] - factor * rows[col][c]
    return rows, pivots, swaps


def solve(matrix: Sequence[Sequence[Jet]], rhs: Sequence[Jet]) -> list[Jet]:
    """Solve matrix . u = rhs with jet entries (Gaussian elimination)."""
    n = len(rhs)
    rows, inverses, _ = _eliminate(matrix, rhs)
    solution: list[Jet] = [None] * n  # type: ignore[list-item]
    for r in reversed(range(n)):
        acc = rows[r][n]
        for c in range(r + 1, n):
            acc = acc - rows[r][c] * solution[c]
        solution[r] = acc * inverses[r]
    return solution


def determinant(matrix: Sequence[Sequence[Jet]]) -> Jet:
    rows, _, swaps = _eliminate(matrix, None)
    det = rows[0][0]
    for i in range(1, len(rows)):
        det = det * rows[i][i]
    return -det if swaps % 2 else det


def inverse_quadratic_form(matrix: Sequence[Sequence[Jet]], vector: Sequence[Jet]) -> Jet:
    """v . matrix^-1 . v"""
    u = solve(matrix, vector)
    total = vector[0] * u[0]
    for v_i, u_i in zip(vector[1:], u[1:]):
        total = total + v_i * u_i
    return total


def derivative_arrays(
    jets: Sequence[Jet],
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Values, gradients and Hessians of jets over one single-group space.

    Returns arrays of shape (J,), (J, n) and (J, n, n); the Hessians are None
    when the order is below 2.
    """
    space = jets[0].space
    if len(space.groups) != 1:
        raise JetSpaceMismatch("derivative_arrays needs a single-group jet space")
    for jet in jets:
        if jet.space != space:
            raise JetSpaceMismatch("derivative_arrays needs jets over one space")

    n, order = space.groups[0]
    stacked = np.stack([jet.coefficients for jet in jets])
    if order == 0:
        return stacked[:, 0], np.zeros((len(jets), n)), None

    lookup = _tables(space).lookup
    eye = np.eye(n, dtype=int)
    gradient = stacked[:, [lookup[tuple(eye[k])] for k in range(n)]]
    if order < 2:
        return stacked[:, 0], gradient, None

    hessian = np.empty((len(jets), n, n))
    for k in range(n):
        for l in range(k, n):
            slot = lookup[tuple(eye[k] + eye[l])]
            hessian[:, k, l] = hessian[:, l, k] = stacked[:, slot] * (2.0 if k == l else 1.0)
    return stacked[:, 0], gradient, hessian
