"""Generic Finsler curvature from F^2 alone.

The pipeline expands F^2 as a jet in (x, y) and derives every quantity from
its definition: no Randers closed forms are used here, which makes this module
the oracle for `randers`. Each derivative lowers one group's truncation order,
so quantities live in smaller spaces than F^2:

    F^2 at (kx, ky)        g, tau at (kx, ky - 2)
    G at (kx - 1, ky - 2)  S at (kx - 1, ky - 3)
    R^i_k, Ric, S_|0, PRic at (kx - 2, ky - 4)

The default (2, 4) gives values of every quantity; (2, 7) keeps PRic to third
order in y for the vertical derivatives.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import simpson

from . import jets
from .const import ConfDefaultInt, JetBudget, VerticalQuantity
from .exceptions import (
    InadmissiblePoint,
    InvalidArgument,
    JetDomainError,
    NotPositiveDefinite,
    NotStronglyConvex,
    UnsupportedJetOrder,
)
from .jets import Jet, JetSpace
from .metric import MetricSpec

_LOGGER = logging.getLogger(__name__)


def _total(terms: Sequence[Jet]) -> Jet:
    result = terms[0]
    for term in terms[1:]:
        result = result + term
    return result


def log_bh_density_jet(a: Sequence[Sequence[Jet]], b: Sequence[Jet]) -> Jet:
    """ln sigma_BH = (n + 1)/2 ln(1 - b^2) + 1/2 ln det a, as an x-jet."""
    n = len(b)
    norm_sq = jets.inverse_quadratic_form(a, b)
    if norm_sq.value >= 1:
        raise NotStronglyConvex(f"b = {math.sqrt(norm_sq.value)!r} >= 1", math.sqrt(norm_sq.value))
    det = jets.determinant(a)
    if det.value <= 0:
        raise NotPositiveDefinite("det a_ij is not positive")
    return 0.5 * (n + 1) * jets.ln(1.0 - norm_sq) + 0.5 * jets.ln(det)


class PhasePipeline:
    """Definitional curvature quantities of F at one (x, y), as jets.

    Stages are computed on first access. A stage needing more jet order than
    the pipeline was built with raises UnsupportedJetOrder.
    """

    def __init__(
        self,
        spec: MetricSpec,
        x: Sequence[float],
        y: Sequence[float],
        *,
        x_order: int = JetBudget.PRIC_X_ORDER,
        y_order: int = JetBudget.PRIC_Y_ORDER,
    ) -> None:
        self.spec = spec
        self.n = spec.dimension
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)

        if self.x.shape != (self.n,) or self.y.shape != (self.n,):
            raise InvalidArgument(f"x and y must have {self.n} components")
        if not np.any(self.y):
            raise InadmissiblePoint("the direction y must be nonzero")

        self.space, _, _ = jets.seed_phase(self.x, self.y, int(x_order), int(y_order))
        self.x_order = int(x_order)
        self.y_order = int(y_order)

    def _space(self, x_order: int, y_order: int) -> JetSpace:
        return JetSpace.phase(self.n, x_order, y_order)

    def _require(self, x_order: int, y_order: int, what: str) -> None:
        if self.x_order < x_order or self.y_order < y_order:
            raise UnsupportedJetOrder(
                f"{what} needs jet orders (x={x_order}, y={y_order}), "
                f"pipeline has (x={self.x_order}, y={self.y_order})"
            )

    def _ys(self, space: JetSpace) -> list[Jet]:
        return jets.coordinates(space, self.y, first_var=self.n)

    def _dx(self, jet: Jet, i: int) -> Jet:
        return jet.derivative(i)

    def _dy(self, jet: Jet, i: int) -> Jet:
        return jet.derivative(self.n + i)

    @cached_property
    def _coefficient_jets(self) -> tuple[list[list[Jet]], list[Jet]]:
        return self.spec.coefficient_jets(self.x, self.x_order)

    @cached_property
    def alpha(self) -> Jet:
        a, _ = self._coefficient_jets
        ys = self._ys(self.space)
        terms = []
        for i in range(self.n):
            for j in range(i, self.n):
                weight = 1.0 if i == j else 2.0
                terms.append(weight * a[i][j].to_space(self.space) * (ys[i] * ys[j]))
        alpha_sq = _total(terms)
        if alpha_sq.value <= 0:
            raise NotPositiveDefinite(f"alpha(y) is not positive at x={self.x.tolist()}")
        return jets.sqrt(alpha_sq)

    @cached_property
    def beta(self) -> Jet:
        _, b = self._coefficient_jets
        ys = self._ys(self.space)
        return _total([b[i].to_space(self.space) * ys[i] for i in range(self.n)])

    @cached_property
    def F(self) -> Jet:
        value = self.alpha + self.beta
        if value.value <= 0:
            raise InadmissiblePoint(f"F(x, y) <= 0 at x={self.x.tolist()}")
        return value

    @cached_property
    def F2(self) -> Jet:
        return self.F * self.F

    @cached_property
    def fundamental_tensor(self) -> list[list[Jet]]:
        """g_ij = 1/2 [F^2]_{y^i y^j}, over (kx, ky - 2)."""
        self._require(0, 2, "the fundamental tensor")
        first = [self._dy(self.F2, j) for j in range(self.n)]
        g: list[list[Jet]] = [[None] * self.n for _ in range(self.n)]  # type: ignore[list-item]
        for i in range(self.n):
            for j in range(i, self.n):
                g[i][j] = g[j][i] = 0.5 * self._dy(first[i], j)
        return g

    @cached_property
    def spray(self) -> list[Jet]:
        """G^i from g_il G^l = 1/4 ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})."""
        self._require(1, 2, "the spray")
        target = self._space(self.x_order - 1, self.y_order - 2)
        ys = self._ys(target)
        g = [[gij.to_space(target) for gij in row] for row in self.fundamental_tensor]
        dx = [self._dx(self.F2, k) for k in range(self.n)]

        rhs = []
        for l in range(self.n):
            mixed = _total([self._dy(dx[k], l).to_space(target) * ys[k] for k in range(self.n)])
            rhs.append(0.25 * (mixed - dx[l].to_space(target)))

        try:
            return jets.solve(g, rhs)
        except JetDomainError:
            raise NotPositiveDefinite(f"g_ij is singular at x={self.x.tolist()}")

    @cached_property
    def log_sigma(self) -> Jet:
        """ln sigma_BH(x) as a jet over the x-group alone."""
        a, b = self._coefficient_jets
        return log_bh_density_jet(a, b)

    @cached_property
    def riemann(self) -> list[list[Jet]]:
        """R^i_k = 2 G^i_{x^k} - y^j G^i_{x^j y^k} + 2 G^j G^i_{y^j y^k} - G^i_{y^j} G^j_{y^k}"""
        self._require(2, 4, "the Riemann curvature")
        n = self.n
        target = self._space(self.x_order - 2, self.y_order - 4)
        ys = self._ys(target)
        G = self.spray
        G_t = [gi.to_space(target) for gi in G]
        dGy = [[self._dy(G[i], j) for j in range(n)] for i in range(n)]
        dGy_t = [[d.to_space(target) for d in row] for row in dGy]
        dGx = [[self._dx(G[i], k) for k in range(n)] for i in range(n)]

        R = []
        for i in range(n):
            row = []
            for k in range(n):
                terms = [2.0 * dGx[i][k].to_space(target)]
                for j in range(n):
                    terms.append(-(ys[j] * self._dy(dGx[i][j], k).to_space(target)))
                    terms.append(2.0 * G_t[j] * self._dy(dGy[i][j], k).to_space(target))
                    terms.append(-(dGy_t[i][j] * dGy_t[j][k]))
                row.append(_total(terms))
            R.append(row)
        return R

    @cached_property
    def ricci(self) -> Jet:
        return _total([self.riemann[i][i] for i in range(self.n)])

    @cached_property
    def s_curvature(self) -> Jet:
        """S = G^m_{y^m} - y^m (ln sigma)_{x^m}, over (kx - 1, ky - 3)."""
        self._require(1, 3, "the S-curvature")
        target = self._space(self.x_order - 1, self.y_order - 3)
        ys = self._ys(target)
        divergence = [self._dy(self.spray[m], m).to_space(target) for m in range(self.n)]
        drift = [
            ys[m] * self.log_sigma.derivative(m).to_space(target) for m in range(self.n)
        ]
        return _total(divergence) - _total(drift)

    @cached_property
    def s_horizontal(self) -> Jet:
        """S_|0 = y^m S_{x^m} - 2 G^m S_{y^m}"""
        self._require(2, 4, "the horizontal derivative of S")
        target = self._space(self.x_order - 2, self.y_order - 4)
        ys = self._ys(target)
        S = self.s_curvature
        terms = []
        for m in range(self.n):
            terms.append(ys[m] * self._dx(S, m).to_space(target))
            terms.append(-2.0 * self.spray[m].to_space(target) * self._dy(S, m).to_space(target))
        return _total(terms)

    @cached_property
    def pric(self) -> Jet:
        """PRic = Ric + (n-1)/(n+1) S_|0 + (n-1)/(n+1)^2 S^2"""
        n = self.n
        target = self.ricci.space
        S = self.s_curvature.to_space(target)
        return (
            self.ricci
            + ((n - 1) / (n + 1)) * self.s_horizontal
            + ((n - 1) / (n + 1) ** 2) * (S * S)
        )

    @cached_property
    def tau(self) -> Jet:
        """Distortion ln(sqrt(det g) / sigma_BH), over (kx, ky - 2)."""
        g = self.fundamental_tensor
        det = jets.determinant(g)
        if det.value <= 0:
            raise NotPositiveDefinite(f"det g_ij is not positive at x={self.x.tolist()}")
        return 0.5 * jets.ln(det) - self.log_sigma.to_space(det.space)

    @cached_property
    def s_transported(self) -> Jet:
        """S as the horizontal derivative of tau: y^m tau_{x^m} - 2 G^m tau_{y^m}"""
        self._require(1, 3, "the S-curvature")
        target = self._space(self.x_order - 1, self.y_order - 3)
        ys = self._ys(target)
        terms = []
        for m in range(self.n):
            terms.append(ys[m] * self._dx(self.tau, m).to_space(target))
            terms.append(
                -2.0 * self.spray[m].to_space(target) * self._dy(self.tau, m).to_space(target)
            )
        return _total(terms)

    def vertical_third(self, jet: Jet) -> np.ndarray:
        """Third y-derivatives of a pipeline quantity, shape (n, n, n)."""
        n = self.n
        result = np.empty((n, n, n))
        for j in range(n):
            for k in range(j, n):
                for l in range(k, n):
                    multi = [0] * (2 * n)
                    for index in (j, k, l):
                        multi[n + index] += 1
                    value = jet.partial(multi)
                    for p in {(j, k, l), (j, l, k), (k, j, l), (k, l, j), (l, j, k), (l, k, j)}:
                        result[p] = value
        return result


@dataclass(frozen=True)
class FinslerEval:
    """Definitional curvature data of F at one (x, y)."""

    x: np.ndarray
    y: np.ndarray
    F: float
    g: np.ndarray
    g_inv: np.ndarray
    spray: np.ndarray
    riemann: np.ndarray  # [i, k] = R^i_k
    ricci: float
    sigma_bh: float
    tau: float
    S: float
    S_horizontal: float
    pric: float


def _checked_pipeline(
    spec: MetricSpec, x: Sequence[float], y: Sequence[float], x_order: int, y_order: int
) -> PhasePipeline:
    spec.check_admissible(x)
    return PhasePipeline(spec, x, y, x_order=x_order, y_order=y_order)


def _values(row: Sequence[Jet]) -> np.ndarray:
    return np.array([jet.value for jet in row])


def finsler_norm(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> float:
    a, b = spec.coefficients(x)
    y = np.asarray(y, dtype=float)
    return float(np.sqrt(y @ a @ y) + b @ y)


def fundamental_tensor(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    pipeline = _checked_pipeline(spec, x, y, 0, 2)
    g = np.array([_values(row) for row in pipeline.fundamental_tensor])
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"g_ij is not positive definite at x={list(x)}")
    return g


def spray(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """Spray coefficients G^i(x, y)."""
    return _values(_checked_pipeline(spec, x, y, 1, 2).spray)


def riemann_curvature(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    pipeline = _checked_pipeline(spec, x, y, 2, 4)
    return np.array([_values(row) for row in pipeline.riemann])


def ricci(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> float:
    return _checked_pipeline(spec, x, y, 2, 4).ricci.value


def bh_volume_density(spec: MetricSpec, x: Sequence[float]) -> float:
    """sigma_BH(x) = (1 - b^2)^((n+1)/2) sqrt(det a)."""
    a, b = spec.check_admissible(x)
    norm_sq = float(b @ np.linalg.solve(a, b))
    return float((1.0 - norm_sq) ** ((spec.dimension + 1) / 2) * np.sqrt(np.linalg.det(a)))


def bh_volume_density_quadrature(
    spec: MetricSpec, x: Sequence[float], panels: int = ConfDefaultInt.QUADRATURE_PANELS
) -> float:
    """sigma_BH from the area of the unit ball {y : F(x, y) < 1} (n = 2 only)."""
    if spec.dimension != 2:
        raise InvalidArgument("quadrature of the BH volume density is implemented for n = 2")

    a, b = spec.check_admissible(x)
    theta = np.linspace(0.0, 2.0 * np.pi, int(panels) + 1)
    u = np.stack([np.cos(theta), np.sin(theta)])
    F = np.sqrt(np.einsum("it,ij,jt->t", u, a, u)) + b @ u
    area = 0.5 * simpson(1.0 / F**2, x=theta)
    return float(np.pi / area)


def distortion(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> float:
    """tau(x, y) = ln(sqrt(det g) / sigma_BH)."""
    return _checked_pipeline(spec, x, y, 0, 2).tau.value


def s_curvature(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> float:
    return _checked_pipeline(spec, x, y, 1, 3).s_curvature.value


def s_curvature_transported(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> float:
    """S computed a second way, as the horizontal derivative of the distortion."""
    return _checked_pipeline(spec, x, y, 1, 3).s_transported.value


def pric_generic(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> float:
    """Projective Ricci curvature from F alone (BH volume form)."""
    return _checked_pipeline(spec, x, y, 2, 4).pric.value


def vertical_third_derivative(
    quantity: VerticalQuantity | str,
    spec: MetricSpec,
    x: Sequence[float],
    y: Sequence[float],
) -> np.ndarray:
    """Q_{.j.k.l}: third partial y-derivatives of F, F^2, Ric or PRic."""
    try:
        quantity = VerticalQuantity(quantity)
    except ValueError:
        raise InvalidArgument(
            f"unknown quantity '{quantity}', expected one of {[q.value for q in VerticalQuantity]}"
        )

    if quantity in (VerticalQuantity.F, VerticalQuantity.F2):
        pipeline = _checked_pipeline(spec, x, y, 0, 3)
        return pipeline.vertical_third(
            pipeline.F if quantity is VerticalQuantity.F else pipeline.F2
        )

    pipeline = _checked_pipeline(
        spec, x, y, JetBudget.VERTICAL_X_ORDER, JetBudget.VERTICAL_Y_ORDER
    )
    return pipeline.vertical_third(
        pipeline.ricci if quantity is VerticalQuantity.RIC else pipeline.pric
    )


def evaluate(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> FinslerEval:
    """All definitional quantities at (x, y) from one (2, 4) pipeline."""
    pipeline = _checked_pipeline(spec, x, y, JetBudget.PRIC_X_ORDER, JetBudget.PRIC_Y_ORDER)
    g = np.array([_values(row) for row in pipeline.fundamental_tensor])
    return FinslerEval(
        x=pipeline.x,
        y=pipeline.y,
        F=pipeline.F.value,
        g=g,
        g_inv=np.linalg.inv(g),
        spray=_values(pipeline.spray),
        riemann=np.array([_values(row) for row in pipeline.riemann]),
        ricci=pipeline.ricci.value,
        sigma_bh=math.exp(pipeline.log_sigma.value),
        tau=pipeline.tau.value,
        S=pipeline.s_curvature.value,
        S_horizontal=pipeline.s_horizontal.value,
        pric=pipeline.pric.value,
    )
