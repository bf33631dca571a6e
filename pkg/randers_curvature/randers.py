"""Randers closed forms for the projective Ricci curvature and its verifiers.

F = alpha + beta. Abbreviations follow the r/s/q/t/rho suite of `riemann`:
``e00 = r00 + 2 beta s0`` and, for a direction y, ``D = s^m_{0;m}``,
``K = rho_m s^m_0``, ``H = rho_{0;0}``, ``T = t00``, ``tau = t^m_m`` and
``A`` the Ricci curvature of alpha.

The verifiers evaluate the characterizing conditions of each theorem on
seeded samples and return a VerificationReport. They run the per-sample work
in threads so a large sample count can use several workers.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import finsler
from .config import Tolerances
from .const import (
    E_IDENTITY_SIGN,
    FIT,
    HOMOGENEITY_SCALES,
    ConfDefaultInt,
    Identity,
    JetBudget,
    PRicForm,
    Theorem,
    VerticalQuantity,
    VolumeForm,
)
from .exceptions import InadmissiblePoint, InvalidArgument, NoAdmissibleSamples
from .expr import Expression
from .finsler import PhasePipeline
from .helpers import direction_frame, relative_residual
from .metric import MetricSpec
from .report import (
    SampleRecord,
    SkippedPoint,
    VerificationReport,
    summarize_condition,
)
from .riemann import BetaEval, RiemannEval, alpha_ricci, christoffel, evaluate_point
from .sampling import Sample, async_map_samples, draw_coefficients

_LOGGER = logging.getLogger(__name__)

CValue = float | Expression | str


@dataclass(frozen=True)
class RandersDirection:
    """Contractions of the beta suite with one direction y."""

    n: int
    y: np.ndarray
    alpha: float
    beta: float
    r00: float
    s0: float
    t00: float
    t_trace: float
    rho0: float
    rho00: float
    div_s0: float
    rho_s0: float
    alpha_ric: float

    @property
    def F(self) -> float:
        return self.alpha + self.beta

    @property
    def e00(self) -> float:
        return self.r00 + 2.0 * self.beta * self.s0


def _bh_rho(suite: BetaEval) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and covariant Hessian of ln(sigma_BH / sigma_alpha) / (n + 1)."""
    return suite.rho_grad, suite.rho_hessian


# rho_i and rho_{i;j} of each supported volume form
VOLUME_RHO: dict[VolumeForm, Callable[[BetaEval], tuple[np.ndarray, np.ndarray]]] = {
    VolumeForm.BUSEMANN_HAUSDORFF: _bh_rho,
}


@dataclass(frozen=True)
class RandersPoint:
    riemann: RiemannEval
    suite: BetaEval
    volume_form: VolumeForm = VolumeForm.BUSEMANN_HAUSDORFF

    @property
    def n(self) -> int:
        return len(self.suite.b)

    def direction(self, y: Sequence[float]) -> RandersDirection:
        y = np.asarray(y, dtype=float)
        R, B = self.riemann, self.suite
        rho_grad, rho_hessian = VOLUME_RHO[self.volume_form](B)
        alpha = float(np.sqrt(y @ R.a @ y))
        beta = float(B.b @ y)
        if alpha + beta <= 0:
            raise InadmissiblePoint(f"F(x, y) <= 0 at x={R.x.tolist()}")
        return RandersDirection(
            n=self.n,
            y=y,
            alpha=alpha,
            beta=beta,
            r00=float(y @ B.r @ y),
            s0=float(B.s_vec @ y),
            t00=float(y @ B.t @ y),
            t_trace=B.t_trace,
            rho0=float(rho_grad @ y),
            rho00=float(y @ rho_hessian @ y),
            div_s0=float(B.divergence_s @ y),
            rho_s0=float(rho_grad @ B.s_up @ y),
            alpha_ric=float(y @ R.ricci @ y),
        )


def randers_point(
    spec: MetricSpec,
    x: Sequence[float],
    volume_form: VolumeForm | str = VolumeForm.BUSEMANN_HAUSDORFF,
) -> RandersPoint:
    try:
        volume_form = VolumeForm(volume_form)
    except ValueError as e:
        raise InvalidArgument(f"{e}")
    spec.check_admissible(x)
    riemann, suite = evaluate_point(spec, x)
    return RandersPoint(riemann=riemann, suite=suite, volume_form=volume_form)


def pric_closed(d: RandersDirection, form: PRicForm = PRicForm.INVARIANT) -> float:
    m = d.n - 1
    value = (
        d.alpha_ric
        + 2.0 * d.alpha * d.div_s0
        - 2.0 * d.t00
        - d.alpha**2 * d.t_trace
        + m * (d.rho0**2 - d.rho00 + 2.0 * d.alpha * d.rho_s0)
    )
    if form is PRicForm.EXPANDED:
        value -= m * d.alpha * d.s0 * d.e00 / d.F**2
    return value


def pric_randers(
    spec: MetricSpec,
    x: Sequence[float],
    y: Sequence[float],
    volume_form: VolumeForm | str = VolumeForm.BUSEMANN_HAUSDORFF,
    form: PRicForm | str = PRicForm.INVARIANT,
) -> float:
    """Projective Ricci curvature of a Randers metric from its closed form."""
    try:
        form = PRicForm(form)
    except ValueError as e:
        raise InvalidArgument(f"{e}")
    return pric_closed(randers_point(spec, x, volume_form).direction(y), form)


def s_curvature_randers(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> float:
    """S = (n + 1) (e00 / (2F) - s0 - rho0)."""
    d = randers_point(spec, x).direction(y)
    return (d.n + 1) * (d.e00 / (2.0 * d.F) - d.s0 - d.rho0)


def spray_randers(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """G^i = G_alpha^i + (e00 / (2F) - s0) y^i + alpha s^i_0."""
    point = randers_point(spec, x)
    d = point.direction(y)
    g_alpha = 0.5 * np.einsum("ijk,j,k->i", point.riemann.christoffel, d.y, d.y)
    return g_alpha + (d.e00 / (2.0 * d.F) - d.s0) * d.y + d.alpha * (point.suite.s_up @ d.y)


@dataclass(frozen=True)
class ECoefficients:
    """Coefficients of F^2 (PRic - (n-1) c F^2) as a quartic in alpha."""

    e0: float
    e1: float
    e2: float
    e3: float
    e4: float

    def polynomial(self, alpha: float) -> float:
        return (((self.e4 * alpha + self.e3) * alpha + self.e2) * alpha + self.e1) * alpha + self.e0


@dataclass(frozen=True)
class NCoefficients:
    """Coefficients of the odd part F^2 (PRic(y) - PRic(-y)) as a cubic in alpha."""

    n1: float
    n2: float
    n3: float

    def polynomial(self, alpha: float) -> float:
        return ((self.n3 * alpha + self.n2) * alpha + self.n1) * alpha


def e_coefficients(d: RandersDirection, c: float) -> ECoefficients:
    m = d.n - 1
    A, D, T, tau = d.alpha_ric, d.div_s0, d.t00, d.t_trace
    H, R0, K, b, s0 = d.rho00, d.rho0**2, d.rho_s0, d.beta, d.s0
    return ECoefficients(
        e4=-tau - m * c,
        e3=2.0 * (D - b * tau + m * (K - 2.0 * c * b)),
        e2=A + 4 * b * D - 2 * T - b**2 * tau + 4 * m * b * K - m * H + m * R0
        - 6 * m * c * b**2,
        e1=2 * b * A + 2 * b**2 * D - 4 * b * T - 2 * m * b * s0**2 + 2 * m * b**2 * K
        - 2 * m * b * H + 2 * m * b * R0 - m * d.r00 * s0 - 4 * m * c * b**3,
        e0=(A - 2 * T - m * H + m * R0 - m * c * b**2) * b**2,
    )


def n_coefficients(d: RandersDirection) -> NCoefficients:
    m = d.n - 1
    D, K, b = d.div_s0, d.rho_s0, d.beta
    return NCoefficients(
        n1=4 * b**2 * D - 4 * m * b * d.s0**2 + 4 * m * b**2 * K - 2 * m * d.r00 * d.s0,
        n2=8 * b * D + 8 * m * b * K,
        n3=4 * D + 4 * m * K,
    )


def e_identity_lhs(d: RandersDirection, c: float) -> float:
    """F^2 (PRic - (n-1) c F^2) with the expanded closed form."""
    F2 = d.F**2
    return F2 * (pric_closed(d, PRicForm.EXPANDED) - (d.n - 1) * c * F2)


def calibrate_e_sign(spec: MetricSpec, samples: Sequence[Sample], c: float = 0.0) -> int:
    """Sign s making F^2 (PRic - (n-1) c F^2) = s * sum E_i alpha^i hold."""
    plus = minus = 0.0
    for sample in samples:
        d = randers_point(spec, sample.x).direction(sample.y)
        lhs = e_identity_lhs(d, c)
        poly = e_coefficients(d, c).polynomial(d.alpha)
        plus += abs(lhs - poly)
        minus += abs(lhs + poly)
    return 1 if plus <= minus else -1


def calibrate_pric_form(spec: MetricSpec, samples: Sequence[Sample]) -> PRicForm:
    """The closed form that matches the definitional PRic on `samples`."""
    error = dict.fromkeys(PRicForm, 0.0)
    for sample in samples:
        d = randers_point(spec, sample.x).direction(sample.y)
        generic = PhasePipeline(spec, sample.x, sample.y).pric.value
        for form in PRicForm:
            error[form] += abs(pric_closed(d, form) - generic)
    _LOGGER.debug(f"PRic closed-form calibration errors: {error}")
    return min(PRicForm, key=lambda form: error[form])


def _third_alpha(a: np.ndarray, y: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    y_low = a @ y
    cyclic = (
        np.einsum("jk,l->jkl", a, y_low)
        + np.einsum("kl,j->jkl", a, y_low)
        + np.einsum("lj,k->jkl", a, y_low)
    )
    return cyclic, np.einsum("j,k,l->jkl", y_low, y_low, y_low)


def third_derivative_closed_form(
    quantity: VerticalQuantity | str,
    spec: MetricSpec,
    x: Sequence[float],
    y: Sequence[float],
    *,
    displayed: bool = False,
) -> np.ndarray:
    """Closed third y-derivatives of F or F^2 (indices lowered with a_ij).

    With ``displayed=True`` the commonly printed variants are returned instead;
    they differ from the exact derivatives in the sign of the y_j y_k y_l term
    (and by a factor 2 for F^2) and are kept for comparison reports.
    """
    quantity = VerticalQuantity(quantity)
    a, b = spec.check_admissible(x)
    y = np.asarray(y, dtype=float)
    alpha = float(np.sqrt(y @ a @ y))
    beta = float(b @ y)
    cyclic, cubic = _third_alpha(a, y, alpha)
    sign = -1.0 if displayed else 1.0

    alpha3 = -cyclic / alpha**3 + sign * 3.0 * cubic / alpha**5
    if quantity is VerticalQuantity.F:
        return alpha3

    if quantity is not VerticalQuantity.F2:
        raise InvalidArgument(f"no closed third derivative for '{quantity}'")

    y_low = a @ y
    alpha2 = a / alpha - np.outer(y_low, y_low) / alpha**3
    mixed = (
        np.einsum("jk,l->jkl", alpha2, b)
        + np.einsum("kl,j->jkl", alpha2, b)
        + np.einsum("lj,k->jkl", alpha2, b)
    )
    exact = beta * alpha3 + mixed
    return exact if displayed else 2.0 * exact


def _c_at(c: CValue, x: np.ndarray) -> float:
    if isinstance(c, Expression):
        return float(c.evaluate([float(v) for v in x]))
    return float(c)


def fit_isotropic_constant(directions: Sequence[RandersDirection]) -> float:
    """Least-squares c for the Ricci condition over a direction frame.

    The condition is linear in c: A - tau alpha^2 - 2T - m (H - R0) =
    c m (alpha^2 + beta^2); rows are normalized by F^2.
    """
    m = directions[0].n - 1
    lhs = np.array(
        [
            (d.alpha_ric - d.t_trace * d.alpha**2 - 2 * d.t00 - m * (d.rho00 - d.rho0**2))
            / d.F**2
            for d in directions
        ]
    )
    weight = np.array([m * (d.alpha**2 + d.beta**2) / d.F**2 for d in directions])
    return float(weight @ lhs / (weight @ weight))


def ricci_condition(d: RandersDirection, c: float) -> float:
    """F^2-relative residual of A = (tau + m c) alpha^2 + 2T + m (H - R0 + c beta^2)."""
    m = d.n - 1
    rhs = (d.t_trace + m * c) * d.alpha**2 + 2 * d.t00 + m * (d.rho00 - d.rho0**2 + c * d.beta**2)
    return abs(d.alpha_ric - rhs) / d.F**2


def divergence_condition(point: RandersPoint, c: float) -> float:
    """alpha-norm of the covector s^m_{j;m} + m (rho_m s^m_j - c b_j)."""
    B = point.suite
    m = point.n - 1
    v = B.divergence_s + m * (B.rho_grad @ B.s_up - c * B.b)
    return float(np.sqrt(max(v @ point.riemann.a_inv @ v, 0.0)))


def s0_disjunction(d: RandersDirection) -> float:
    """Scale-free residual of "s0 = 0 or r00 + 2 beta s0 = 0"."""
    return min(abs(d.s0) / d.F, abs(d.e00) / d.F**2)


def _directions(point: RandersPoint, sample: Sample) -> list[RandersDirection]:
    frame = direction_frame(point.n)
    return [point.direction(row) for row in frame] + [point.direction(sample.y)]


def _isotropic_record(spec: MetricSpec, c: CValue, sample: Sample) -> SampleRecord:
    point = randers_point(spec, sample.x)
    directions = _directions(point, sample)
    c_value = fit_isotropic_constant(directions) if c == FIT else _c_at(c, sample.x)
    here = directions[-1]
    return SampleRecord(
        x=sample.x,
        y=sample.y,
        residuals={
            "ricci_identity": max(ricci_condition(d, c_value) for d in directions),
            "divergence_identity": divergence_condition(point, c_value),
            "s0_disjunction": max(s0_disjunction(d) for d in directions),
        },
        values={"c": c_value, "F": here.F, "pric": pric_closed(here)},
    )


def _reversible_record(spec: MetricSpec, sample: Sample) -> SampleRecord:
    point = randers_point(spec, sample.x)
    directions = _directions(point, sample)
    odd = max(
        abs(pric_closed(d) - pric_closed(point.direction(-d.y))) / d.F**2 for d in directions
    )
    return SampleRecord(
        x=sample.x,
        y=sample.y,
        residuals={
            "divergence_identity": divergence_condition(point, 0.0),
            "s0_disjunction": max(s0_disjunction(d) for d in directions),
            "direct_reversibility": odd,
        },
        values={"F": directions[-1].F},
    )


def _square_record(spec: MetricSpec, sample: Sample) -> SampleRecord:
    spec.check_admissible(sample.x)
    pipeline = PhasePipeline(
        spec,
        sample.x,
        sample.y,
        x_order=JetBudget.VERTICAL_X_ORDER,
        y_order=JetBudget.VERTICAL_Y_ORDER,
    )
    pric3 = pipeline.vertical_third(pipeline.pric)
    ric3 = pipeline.vertical_third(pipeline.ricci)
    F = pipeline.F.value
    return SampleRecord(
        x=sample.x,
        y=sample.y,
        residuals={
            "pric_third_derivative": float(np.max(np.abs(pric3))),
            "ric_third_derivative": float(np.max(np.abs(ric3))),
        },
        values={
            "F": F,
            "S": pipeline.s_curvature.value,
            "beta_over_F": pipeline.beta.value / F,
        },
    )


@dataclass(frozen=True)
class SCurvatureFit:
    """S / ((n + 1) F) over a fan of directions at one point."""

    x: np.ndarray
    c: float  # mean over the fan
    spread: float  # max - min over the fan
    gradient: np.ndarray  # c_m = d_m c
    c0: float  # c_m y^m
    pric_form_residual: float  # Ric + m c0 F + m c^2 F^2 against PRic


def fit_isotropic_s_at(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> SCurvatureFit:
    spec.check_admissible(x)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = spec.dimension
    fan = list(direction_frame(n)) + [y]

    ratios = []
    for direction in fan:
        pipeline = PhasePipeline(spec, x, direction, x_order=2, y_order=3)
        S = pipeline.s_curvature
        ratios.append(S / ((n + 1) * pipeline.F.to_space(S.space)))

    values = np.array([r.value for r in ratios])
    gradient = np.array([ratios[-1].derivative(m).value for m in range(n)])
    c = float(values.mean())
    c0 = float(gradient @ y)

    pipeline = PhasePipeline(spec, x, y)
    F = pipeline.F.value
    pric = pipeline.pric.value
    m = n - 1
    predicted = pipeline.ricci.value + m * c0 * F + m * c**2 * F**2
    return SCurvatureFit(
        x=x,
        c=c,
        spread=float(values.max() - values.min()),
        gradient=gradient,
        c0=c0,
        pric_form_residual=abs(predicted - pric) / (abs(pric) + F**2),
    )


def _s_fit_record(spec: MetricSpec, sample: Sample) -> SampleRecord:
    fit = fit_isotropic_s_at(spec, sample.x, sample.y)
    values = {"c": fit.c, "c0": fit.c0}
    values.update({f"c_{m + 1}": float(g) for m, g in enumerate(fit.gradient)})
    return SampleRecord(
        x=sample.x,
        y=sample.y,
        residuals={
            "s_isotropy_spread": fit.spread / (1.0 + abs(fit.c)),
            "isotropic_s_pric_form": fit.pric_form_residual,
        },
        values=values,
    )


async def _async_records(
    spec: MetricSpec,
    samples: Sequence[Sample],
    evaluate: Callable[[Sample], SampleRecord],
    *,
    workers: int,
    timeout: float | None,
) -> tuple[list[SampleRecord], list[SkippedPoint]]:
    outcomes = await async_map_samples(evaluate, list(samples), workers=workers, timeout=timeout)
    records = [o.result for o in outcomes if o.skipped is None]
    skipped = [SkippedPoint(x=o.sample.x, reason=o.skipped) for o in outcomes if o.skipped]
    if not records:
        raise NoAdmissibleSamples(f"every sample of '{spec.name}' was skipped")
    return records, skipped


async def async_verify_isotropic(
    spec: MetricSpec,
    samples: Sequence[Sample],
    c: CValue = 0.0,
    *,
    tolerances: Tolerances | None = None,
    workers: int = ConfDefaultInt.WORKERS,
    timeout: float | None = None,
    target: str = Theorem.ISOTROPIC,
) -> VerificationReport:
    """Isotropic projective Ricci curvature PRic = (n-1) c F^2.

    `c` is a constant, an expression in x, or "fit" to fit c(x) per point.
    """
    tolerances = tolerances or Tolerances()
    records, skipped = await _async_records(
        spec, samples, partial(_isotropic_record, spec, c), workers=workers, timeout=timeout
    )
    conditions = {
        name: summarize_condition(name, records, tolerances.identity)
        for name in ("ricci_identity", "divergence_identity", "s0_disjunction")
    }
    fitted = np.array([r.values["c"] for r in records])
    extras = {
        "c": c.to_source() if isinstance(c, Expression) else c,
        "c_min": float(fitted.min()),
        "c_max": float(fitted.max()),
    }
    if c == FIT:
        extras["c_constant"] = bool(
            fitted.max() - fitted.min() <= tolerances.identity * (1.0 + np.abs(fitted).max())
        )
    return VerificationReport(
        target=target,
        spec_name=spec.name,
        conditions=conditions,
        records=records,
        skipped=skipped,
        extras=extras,
    )


async def async_verify_flat(
    spec: MetricSpec, samples: Sequence[Sample], **kwargs
) -> VerificationReport:
    """Projectively Ricci-flat: the isotropic conditions with c = 0."""
    return await async_verify_isotropic(spec, samples, 0.0, target=Theorem.FLAT, **kwargs)


async def async_verify_reversible(
    spec: MetricSpec,
    samples: Sequence[Sample],
    *,
    tolerances: Tolerances | None = None,
    workers: int = ConfDefaultInt.WORKERS,
    timeout: float | None = None,
) -> VerificationReport:
    """Reversible projective Ricci curvature.

    The verdict comes from the divergence and s0 conditions; the direct
    comparison of PRic(y) with PRic(-y) is informational, and `consistent`
    records whether both agree.
    """
    tolerances = tolerances or Tolerances()
    records, skipped = await _async_records(
        spec, samples, partial(_reversible_record, spec), workers=workers, timeout=timeout
    )
    conditions = {
        "divergence_identity": summarize_condition(
            "divergence_identity", records, tolerances.identity
        ),
        "s0_disjunction": summarize_condition("s0_disjunction", records, tolerances.identity),
        "direct_reversibility": summarize_condition(
            "direct_reversibility", records, tolerances.reversibility, informational=True
        ),
    }
    by_conditions = conditions["divergence_identity"].passed and conditions["s0_disjunction"].passed
    direct = conditions["direct_reversibility"].passed
    return VerificationReport(
        target=Theorem.REVERSIBLE,
        spec_name=spec.name,
        conditions=conditions,
        records=records,
        skipped=skipped,
        extras={
            "conditions_pass": by_conditions,
            "direct_pass": direct,
            "consistent": by_conditions == direct,
        },
    )


async def async_fit_isotropic_s(
    spec: MetricSpec,
    samples: Sequence[Sample],
    *,
    tolerances: Tolerances | None = None,
    workers: int = ConfDefaultInt.WORKERS,
    timeout: float | None = None,
) -> VerificationReport:
    """Fit S = (n + 1) c(x) F at every sample and report the spread of c."""
    tolerances = tolerances or Tolerances()
    records, skipped = await _async_records(
        spec, samples, partial(_s_fit_record, spec), workers=workers, timeout=timeout
    )
    conditions = {
        "s_isotropy_spread": summarize_condition("s_isotropy_spread", records, tolerances.identity),
        "isotropic_s_pric_form": summarize_condition(
            "isotropic_s_pric_form", records, tolerances.identity, informational=True
        ),
    }
    c = np.array([r.values["c"] for r in records])
    return VerificationReport(
        target="isotropicS",
        spec_name=spec.name,
        conditions=conditions,
        records=records,
        skipped=skipped,
        extras={"c_min": float(c.min()), "c_max": float(c.max())},
    )


async def async_verify_square(
    spec: MetricSpec,
    samples: Sequence[Sample],
    *,
    tolerances: Tolerances | None = None,
    workers: int = ConfDefaultInt.WORKERS,
    timeout: float | None = None,
) -> VerificationReport:
    """PRic quadratic in y: its third vertical derivatives vanish.

    The S-curvature fit and the third derivatives of Ric are reported
    alongside; they do not decide the verdict.
    """
    tolerances = tolerances or Tolerances()
    records, skipped = await _async_records(
        spec, samples, partial(_square_record, spec), workers=workers, timeout=timeout
    )
    s_fit = await async_fit_isotropic_s(
        spec, [Sample(r.x, r.y) for r in records], tolerances=tolerances, workers=workers, timeout=timeout
    )
    conditions = {
        "pric_third_derivative": summarize_condition(
            "pric_third_derivative", records, tolerances.square
        ),
        "ric_third_derivative": summarize_condition(
            "ric_third_derivative", records, tolerances.square, informational=True
        ),
    }
    beta_over_F = np.abs([r.values["beta_over_F"] for r in records])
    s_isotropic = s_fit.conditions["s_isotropy_spread"].passed
    return VerificationReport(
        target=Theorem.SQUARE,
        spec_name=spec.name,
        conditions=conditions,
        records=records,
        skipped=skipped,
        extras={
            "s_isotropic": s_isotropic,
            "s_isotropy_spread": s_fit.conditions["s_isotropy_spread"].max_residual,
            "s_c_min": s_fit.extras["c_min"],
            "s_c_max": s_fit.extras["c_max"],
            "max_abs_beta_over_F": float(beta_over_F.max()),
            "beta_vanishes": bool(beta_over_F.max() <= tolerances.triviality),
        },
    )


async def async_verify(
    spec: MetricSpec,
    theorem: Theorem | str,
    samples: Sequence[Sample],
    *,
    c: CValue | None = None,
    tolerances: Tolerances | None = None,
    workers: int = ConfDefaultInt.WORKERS,
    timeout: float | None = None,
) -> VerificationReport:
    options = {"tolerances": tolerances, "workers": workers, "timeout": timeout}
    match Theorem(theorem):
        case Theorem.ISOTROPIC:
            return await async_verify_isotropic(spec, samples, FIT if c is None else c, **options)
        case Theorem.FLAT:
            return await async_verify_flat(spec, samples, **options)
        case Theorem.REVERSIBLE:
            return await async_verify_reversible(spec, samples, **options)
        case Theorem.SQUARE:
            return await async_verify_square(spec, samples, **options)


def verify(
    spec: MetricSpec, theorem: Theorem | str, samples: Sequence[Sample], **kwargs
) -> VerificationReport:
    """Blocking form of async_verify."""
    return asyncio.run(async_verify(spec, theorem, samples, **kwargs))


def _eq7_record(spec: MetricSpec, sample: Sample) -> SampleRecord:
    d = randers_point(spec, sample.x).direction(sample.y)
    generic = PhasePipeline(spec, sample.x, sample.y).pric.value
    closed = pric_closed(d, PRicForm.INVARIANT)
    expanded = pric_closed(d, PRicForm.EXPANDED)
    offset = (d.n - 1) * d.alpha * d.s0 * d.e00 / d.F**2
    F2 = d.F**2
    return SampleRecord(
        x=sample.x,
        y=sample.y,
        residuals={
            "closed_form": relative_residual(closed, generic, F2),
            "expanded_offset": relative_residual(expanded + offset, generic, F2),
        },
        values={"generic": generic, "invariant": closed, "expanded": expanded},
    )


def _epoly_record(spec: MetricSpec, c: float, sample: Sample) -> SampleRecord:
    d = randers_point(spec, sample.x).direction(sample.y)
    generic = PhasePipeline(spec, sample.x, sample.y).pric.value
    F2 = d.F**2
    m = d.n - 1
    poly = E_IDENTITY_SIGN * e_coefficients(d, c).polynomial(d.alpha)
    lhs = e_identity_lhs(d, c)
    from_generic = F2 * (generic - m * c * F2) - m * d.alpha * d.s0 * d.e00
    return SampleRecord(
        x=sample.x,
        y=sample.y,
        residuals={
            "e_polynomial": abs(lhs - poly) / (F2 * abs(pric_closed(d, PRicForm.EXPANDED)) + 1.0),
            "e_polynomial_generic": abs(from_generic - poly) / (F2 * abs(generic) + 1.0),
        },
        values={"c": c, "lhs": lhs, "polynomial": poly},
    )


def _npoly_record(spec: MetricSpec, sample: Sample) -> SampleRecord:
    point = randers_point(spec, sample.x)
    d = point.direction(sample.y)
    N = n_coefficients(d)
    m = d.n - 1
    F2 = d.F**2

    forward = PhasePipeline(spec, sample.x, sample.y).pric.value
    backward = PhasePipeline(spec, sample.x, -sample.y).pric.value
    odd_closed = pric_closed(d) - pric_closed(point.direction(-sample.y))
    shift = 2.0 * m * d.alpha * d.s0 * d.e00
    poly = N.polynomial(d.alpha)
    scale = F2 * (abs(forward) + abs(backward)) + F2**2

    return SampleRecord(
        x=sample.x,
        y=sample.y,
        residuals={
            "n2_relation": abs(N.n2 - 2.0 * d.beta * N.n3) / (abs(N.n2) + F2),
            "odd_part": abs(poly - (F2 * (forward - backward) - shift)) / scale,
            "odd_part_closed": abs(poly - (F2 * odd_closed - shift)) / scale,
        },
        values={"n1": N.n1, "n2": N.n2, "n3": N.n3, "odd_part": forward - backward},
    )


def _homogeneity_record(spec: MetricSpec, sample: Sample) -> SampleRecord:
    base = PhasePipeline(spec, sample.x, sample.y)
    worst = dict.fromkeys(("F", "G", "S", "Ric", "PRic"), 0.0)

    for scale in HOMOGENEITY_SCALES:
        scaled = PhasePipeline(spec, sample.x, scale * sample.y)
        F_scaled = scaled.F.value
        pairs = {
            "F": (scaled.F.value, base.F.value, 1),
            "G": (
                np.array([g.value for g in scaled.spray]),
                np.array([g.value for g in base.spray]),
                2,
            ),
            "S": (scaled.s_curvature.value, base.s_curvature.value, 1),
            "Ric": (scaled.ricci.value, base.ricci.value, 2),
            "PRic": (scaled.pric.value, base.pric.value, 2),
        }
        for name, (value, reference, degree) in pairs.items():
            expected = np.asarray(scale**degree * reference)
            diff = float(np.max(np.abs(np.asarray(value) - expected)))
            floor = max(float(np.max(np.abs(expected))), F_scaled**degree)
            worst[name] = max(worst[name], diff / floor)

    return SampleRecord(
        x=sample.x,
        y=sample.y,
        residuals={f"{name}_homogeneity": value for name, value in worst.items()},
    )


def _two_path_record(spec: MetricSpec, sample: Sample) -> SampleRecord:
    pipeline = PhasePipeline(spec, sample.x, sample.y, x_order=1, y_order=3)
    local = pipeline.s_curvature.value
    transported = pipeline.s_transported.value
    residuals = {"s_two_path": relative_residual(transported, local, pipeline.F.value)}
    values = {"S": local, "S_transported": transported}
    if spec.dimension == 2:
        # S is built on sigma_BH; check its closed form against the unit-ball area
        closed = finsler.bh_volume_density(spec, sample.x)
        quadrature = finsler.bh_volume_density_quadrature(spec, sample.x)
        residuals["bh_quadrature"] = relative_residual(quadrature, closed, 0.0)
        values["sigma_BH"] = closed
    return SampleRecord(x=sample.x, y=sample.y, residuals=residuals, values=values)


async def async_check_identity(
    spec: MetricSpec,
    identity: Identity | str,
    samples: Sequence[Sample],
    *,
    c: float | None = None,
    seed: int = ConfDefaultInt.SEED,
    tolerances: Tolerances | None = None,
    workers: int = ConfDefaultInt.WORKERS,
    timeout: float | None = None,
) -> VerificationReport:
    """Evaluate one cross-check identity on every sample.

    For the E-polynomial identity each sample gets its own c drawn from
    [-1, 1] unless `c` is given.
    """
    identity = Identity(identity)
    tolerances = tolerances or Tolerances()
    samples = list(samples)

    match identity:
        case Identity.EQ7:
            evaluate = partial(_eq7_record, spec)
            names = {"closed_form": tolerances.identity, "expanded_offset": tolerances.identity}
        case Identity.EPOLY:
            constants = (
                [float(c)] * len(samples) if c is not None else draw_coefficients(seed, len(samples))
            )
            by_sample = {id(s): float(k) for s, k in zip(samples, constants)}

            def evaluate(sample: Sample) -> SampleRecord:
                return _epoly_record(spec, by_sample[id(sample)], sample)

            names = {"e_polynomial": tolerances.identity, "e_polynomial_generic": tolerances.identity}
        case Identity.NPOLY:
            evaluate = partial(_npoly_record, spec)
            names = {
                "n2_relation": tolerances.identity,
                "odd_part": tolerances.identity,
                "odd_part_closed": tolerances.identity,
            }
        case Identity.HOMOGENEITY:
            evaluate = partial(_homogeneity_record, spec)
            names = {
                f"{q}_homogeneity": tolerances.homogeneity for q in ("F", "G", "S", "Ric", "PRic")
            }
        case Identity.S_TWO_PATH:
            evaluate = partial(_two_path_record, spec)
            names = {"s_two_path": tolerances.two_path}
            if spec.dimension == 2:
                names["bh_quadrature"] = tolerances.finite_difference

    records, skipped = await _async_records(
        spec, samples, evaluate, workers=workers, timeout=timeout
    )
    return VerificationReport(
        target=identity.value,
        spec_name=spec.name,
        conditions={name: summarize_condition(name, records, tol) for name, tol in names.items()},
        records=records,
        skipped=skipped,
        extras={"e_sign": E_IDENTITY_SIGN} if identity is Identity.EPOLY else {},
    )


def _beta_field(name: str) -> Callable[[MetricSpec, np.ndarray, np.ndarray], object]:
    def evaluate(spec: MetricSpec, x: np.ndarray, y: np.ndarray) -> object:
        return getattr(randers_point(spec, x).suite, name)

    return evaluate


QUANTITIES: dict[str, Callable[[MetricSpec, np.ndarray, np.ndarray], object]] = {
    "F": lambda spec, x, y: finsler.finsler_norm(spec, x, y),
    "g": lambda spec, x, y: finsler.fundamental_tensor(spec, x, y),
    "G": lambda spec, x, y: finsler.spray(spec, x, y),
    "GRanders": spray_randers,
    "R": lambda spec, x, y: finsler.riemann_curvature(spec, x, y),
    "Ric": lambda spec, x, y: finsler.ricci(spec, x, y),
    "alphaRic": lambda spec, x, y: alpha_ricci(spec, x, y),
    "christoffel": lambda spec, x, y: christoffel(spec, x),
    "S": lambda spec, x, y: finsler.s_curvature(spec, x, y),
    "SRanders": s_curvature_randers,
    "STransported": lambda spec, x, y: finsler.s_curvature_transported(spec, x, y),
    "tau": lambda spec, x, y: finsler.distortion(spec, x, y),
    "sigmaBH": lambda spec, x, y: finsler.bh_volume_density(spec, x),
    "PRic": lambda spec, x, y: finsler.pric_generic(spec, x, y),
    "PRicRanders": lambda spec, x, y: pric_randers(spec, x, y),
    "PRicExpanded": lambda spec, x, y: pric_randers(spec, x, y, form=PRicForm.EXPANDED),
}
QUANTITIES.update(
    {
        f"beta.{name}": _beta_field(name)
        for name in (
            "b",
            "norm",
            "r",
            "s",
            "r_vec",
            "s_vec",
            "r_scalar",
            "q",
            "t",
            "t_trace",
            "rho",
            "rho_grad",
            "rho_hessian",
            "divergence_s",
        )
    }
)


def evaluate_quantity(
    name: str, spec: MetricSpec, x: Sequence[float], y: Sequence[float]
) -> object:
    """One named quantity at (x, y): a float or an array."""
    if name not in QUANTITIES:
        raise InvalidArgument(f"unknown quantity '{name}', expected one of {sorted(QUANTITIES)}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (spec.dimension,) or y.shape != (spec.dimension,):
        raise InvalidArgument(f"x and y must have {spec.dimension} components")
    return QUANTITIES[name](spec, x, y)
