"""Randers metric specifications F = alpha + beta on a coordinate box."""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import voluptuous as vol

from .const import ConfDefaultInt
from .exceptions import (
    ExpressionError,
    MetricSpecInvalid,
    NotPositiveDefinite,
    NotStronglyConvex,
)
from .expr import Expression, evaluate, evaluate_grid, parse
from .jets import Jet, JetSpace, coordinates

_LOGGER = logging.getLogger(__name__)

_BOUNDS = vol.ExactSequence([vol.Coerce(float), vol.Coerce(float)])

METRIC_SPEC_SCHEMA = vol.Schema(
    {
        vol.Required("dim"): vol.All(int, vol.Range(min=2, max=4)),
        vol.Required("a"): [[str]],
        vol.Required("b"): [str],
        vol.Required("domain"): [_BOUNDS],
        vol.Optional("name"): str,
    }
)


@dataclass(frozen=True)
class MetricSpec:
    """Coefficient expressions of a Randers metric and its coordinate domain.

    `a` is the full symmetric matrix of expressions; `a_source` and
    `b_source` keep the strings the expressions were parsed from.
    """

    dimension: int
    a: tuple[tuple[Expression, ...], ...]
    b: tuple[Expression, ...]
    domain: tuple[tuple[float, float], ...]
    name: str = "metric"
    a_source: tuple[tuple[str, ...], ...] = field(default=(), compare=False)
    b_source: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def from_strings(
        cls,
        a: Sequence[Sequence[str]],
        b: Sequence[str],
        domain: Sequence[Sequence[float]],
        name: str = "metric",
    ) -> MetricSpec:
        return metric_spec_from_dict(
            {
                "dim": len(b),
                "a": [list(row) for row in a],
                "b": list(b),
                "domain": [list(bounds) for bounds in domain],
                "name": name,
            }
        )

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.domain])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.domain])

    def contains(self, x: Sequence[float]) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def coefficients(self, x: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """a_ij(x) and b_i(x) as floats."""
        point = [float(v) for v in x]
        n = self.dimension
        a = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                a[i, j] = a[j, i] = float(self.a[i][j].evaluate(point))
        b = np.array([float(e.evaluate(point)) for e in self.b])
        return a, b

    def coefficient_grid(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """a and b over points of shape (P, n): arrays (P, n, n) and (P, n)."""
        n = self.dimension
        a = np.empty((points.shape[0], n, n))
        for i in range(n):
            for j in range(i, n):
                a[:, i, j] = a[:, j, i] = evaluate_grid(self.a[i][j], points)
        b = np.stack([evaluate_grid(e, points) for e in self.b], axis=1)
        return a, b

    def coefficient_jets(
        self, x: Sequence[float], order: int
    ) -> tuple[list[list[Jet]], list[Jet]]:
        """Jets of a_ij and b_i at x over the single x-group of the given order."""
        space = JetSpace.single(self.dimension, order)
        point = coordinates(space, x)
        n = self.dimension
        a: list[list[Jet]] = [[None] * n for _ in range(n)]  # type: ignore[list-item]
        for i in range(n):
            for j in range(i, n):
                a[i][j] = a[j][i] = evaluate(self.a[i][j], point)
        b = [evaluate(e, point) for e in self.b]
        return a, b

    def check_admissible(self, x: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """Return a(x), b(x), raising if F is not a Randers metric at x."""
        a, b = self.coefficients(x)
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(f"a_ij is not positive definite at x={list(x)}")

        u = np.linalg.solve(chol, b)
        norm = float(np.sqrt(u @ u))
        if norm >= 1:
            raise NotStronglyConvex(f"b = {norm!r} >= 1 at x={list(x)}", norm)
        return a, b

    def is_admissible(self, x: Sequence[float]) -> bool:
        try:
            self.check_admissible(x)
        except (NotPositiveDefinite, NotStronglyConvex, ExpressionError):
            return False
        return True


def _parse_coefficient(source: str, dimension: int, where: str) -> Expression:
    try:
        return parse(source, dimension)
    except ExpressionError as e:
        raise MetricSpecInvalid(f"{where}: {e}")


def _symmetry_points(domain: Sequence[Sequence[float]]) -> np.ndarray:
    """Cell midpoints of a regular grid over the domain box."""
    m = ConfDefaultInt.SYMMETRY_GRID
    axes = [lo + (np.arange(m) + 0.5) / m * (hi - lo) for lo, hi in domain]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(domain))


def _check_symmetric(
    a: list[list[Expression]],
    sources: Sequence[Sequence[str]],
    domain: Sequence[Sequence[float]],
) -> None:
    """a[i][j] and a[j][i] must agree as functions; identical trees pass at once.

    Points where either entry is undefined are skipped.
    """
    n = len(a)
    points = None
    for i in range(n):
        for j in range(i + 1, n):
            if a[i][j] == a[j][i]:
                continue
            if points is None:
                points = _symmetry_points(domain)
            for x in points:
                try:
                    upper = float(a[i][j].evaluate(list(x)))
                    lower = float(a[j][i].evaluate(list(x)))
                except ExpressionError:
                    continue
                if not np.isclose(upper, lower, rtol=1e-12, atol=1e-12):
                    raise MetricSpecInvalid(
                        f"a is not symmetric: a[{i}][{j}] = '{sources[i][j]}' "
                        f"but a[{j}][{i}] = '{sources[j][i]}' "
                        f"({upper!r} != {lower!r} at x={x.tolist()})"
                    )


def metric_spec_from_dict(data: Any) -> MetricSpec:
    try:
        data = METRIC_SPEC_SCHEMA(data)
    except vol.Invalid as e:
        raise MetricSpecInvalid(f"invalid metric specification: {e}")

    n = data["dim"]
    if len(data["a"]) != n or any(len(row) != n for row in data["a"]):
        raise MetricSpecInvalid(f"a must be a {n}x{n} matrix of expressions")
    if len(data["b"]) != n:
        raise MetricSpecInvalid(f"b must have {n} expressions, got {len(data['b'])}")
    if len(data["domain"]) != n:
        raise MetricSpecInvalid(f"domain must have {n} intervals, got {len(data['domain'])}")
    for i, (lo, hi) in enumerate(data["domain"]):
        if not lo < hi:
            raise MetricSpecInvalid(f"domain[{i}]: empty interval [{lo}, {hi}]")

    a = [
        [_parse_coefficient(data["a"][i][j], n, f"a[{i}][{j}]") for j in range(n)]
        for i in range(n)
    ]
    _check_symmetric(a, data["a"], data["domain"])
    b = [_parse_coefficient(data["b"][i], n, f"b[{i}]") for i in range(n)]

    return MetricSpec(
        dimension=n,
        a=tuple(tuple(row) for row in a),
        b=tuple(b),
        domain=tuple((float(lo), float(hi)) for lo, hi in data["domain"]),
        name=data.get("name", "metric"),
        a_source=tuple(tuple(row) for row in data["a"]),
        b_source=tuple(data["b"]),
    )


def metric_spec_to_dict(spec: MetricSpec) -> dict[str, Any]:
    n = spec.dimension
    a = spec.a_source or tuple(
        tuple(spec.a[i][j].to_source() for j in range(n)) for i in range(n)
    )
    b = spec.b_source or tuple(e.to_source() for e in spec.b)
    return {
        "name": spec.name,
        "dim": n,
        "a": [list(row) for row in a],
        "b": list(b),
        "domain": [[lo, hi] for lo, hi in spec.domain],
    }


def load_metric_spec(path: str | Path) -> MetricSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise MetricSpecInvalid(f"cannot read {path}: {e}")

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MetricSpecInvalid(f"{path}:{e.lineno}:{e.colno}: {e.msg}")

    try:
        spec = metric_spec_from_dict(data)
    except MetricSpecInvalid as e:
        raise MetricSpecInvalid(f"{path}: {e}")

    _LOGGER.debug(f"Loaded metric '{spec.name}' (n={spec.dimension}) from {path}")
    return spec


def dump_metric_spec(spec: MetricSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(metric_spec_to_dict(spec), indent=2) + "\n")
