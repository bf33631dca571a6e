"""Built-in Randers metrics with their documented properties, and random metrics."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import Tolerances
from .const import (
    FIT,
    RANDOM_SPEC_ADMISSIBLE_B,
    RANDOM_SPEC_DOMAIN_HALF_WIDTH,
    ConfDefaultInt,
    Identity,
    Theorem,
)
from .exceptions import (
    ExpressionDomainError,
    GeneratorGaveUp,
    InvalidArgument,
    RandersCurvatureException,
)
from .metric import MetricSpec, dump_metric_spec
from .randers import async_check_identity, async_verify, evaluate_quantity
from .report import VerificationReport
from .sampling import draw_samples

_LOGGER = logging.getLogger(__name__)

ALL_IDENTITIES = {identity.value: True for identity in Identity}
THEOREMS = frozenset(theorem.value for theorem in Theorem)
REVERSIBLE_CONSISTENT = "reversible-consistent"


@dataclass(frozen=True)
class ExpectedValue:
    quantity: str
    x: tuple[float, ...]
    y: tuple[float, ...]
    value: float
    provenance: str
    tolerance: float = 1e-9  # relative


@dataclass(frozen=True)
class CatalogueEntry:
    """A metric with the verdicts and values it is known to produce.

    `verdicts` maps a theorem or identity name to the expected pass/fail;
    names not listed are not asserted.
    """

    spec: MetricSpec
    verdicts: dict[str, bool] = field(default_factory=dict)
    values: tuple[ExpectedValue, ...] = ()
    notes: str = ""

    @property
    def name(self) -> str:
        return self.spec.name


def _flat(name: str, b1: float) -> CatalogueEntry:
    b_norm = abs(b1)
    return CatalogueEntry(
        spec=MetricSpec.from_strings(
            [["1", "0"], ["0", "1"]], [repr(b1), "0"], [[-1, 1], [-1, 1]], name=name
        ),
        verdicts={
            Theorem.ISOTROPIC: True,
            Theorem.FLAT: True,
            Theorem.REVERSIBLE: True,
            Theorem.SQUARE: True,
            **ALL_IDENTITIES,
        },
        values=(
            ExpectedValue("F", (0.0, 0.0), (1.0, 0.0), 1.0 + b1, "alpha + beta with a = delta"),
            ExpectedValue(
                "sigmaBH",
                (0.0, 0.0),
                (1.0, 0.0),
                (1.0 - b_norm**2) ** 1.5,
                "(1 - b^2)^((n+1)/2) with det a = 1",
            ),
            ExpectedValue("PRic", (0.2, -0.4), (0.6, 0.8), 0.0, "every curvature vanishes"),
        ),
        notes="Minkowski Randers metric, constant b.",
    )


def _funk(n: int, half_width: float) -> CatalogueEntry:
    variables = [f"x{i + 1}" for i in range(n)]
    norm_sq = " + ".join(f"{v}^2" for v in variables)
    gap = f"(1 - ({norm_sq}))"
    a = [
        [
            f"({gap}*{1 if i == j else 0} + {variables[min(i, j)]}*{variables[max(i, j)]})/{gap}^2"
            for j in range(n)
        ]
        for i in range(n)
    ]
    b = [f"{v}/{gap}" for v in variables]
    x = (0.3,) + (0.0,) * (n - 1)
    y = (1.0,) + (0.0,) * (n - 1)
    F = 1.3 / 0.91
    return CatalogueEntry(
        spec=MetricSpec.from_strings(
            a, b, [[-half_width, half_width]] * n, name=f"funk{n}"
        ),
        verdicts={Theorem.ISOTROPIC: True, Theorem.FLAT: True, **ALL_IDENTITIES},
        values=(
            ExpectedValue("F", x, y, F, "(sqrt((1-|x|^2)|y|^2 + <x,y>^2) + <x,y>)/(1-|x|^2)"),
            ExpectedValue("S", x, y, (n + 1) * 0.5 * F, "S = (n+1)/2 F"),
            ExpectedValue("Ric", x, y, -(n - 1) * F**2 / 4, "Ric = -(n-1)/4 F^2", 1e-7),
            ExpectedValue("PRic", x, y, 0.0, "projectively Ricci-flat", 1e-7),
        ),
        notes="Funk metric of the unit ball in its Klein alpha + exact beta form.",
    )


def _killing() -> CatalogueEntry:
    return CatalogueEntry(
        spec=MetricSpec.from_strings(
            [["1", "0"], ["0", "1"]],
            ["-0.1*x2", "0.1*x1"],
            [[-1.4, 1.4], [-1.4, 1.4]],
            name="killing",
        ),
        verdicts={
            Theorem.ISOTROPIC: False,
            Theorem.FLAT: False,
            Theorem.REVERSIBLE: False,
            Theorem.SQUARE: False,
            **ALL_IDENTITIES,
        },
        values=(
            ExpectedValue("beta.r_scalar", (0.5, -0.7), (1.0, 0.0), 0.0, "r_ij = 0 for a rotation"),
        ),
        notes="b generates rotations of the Euclidean plane; s_0 does not vanish.",
    )


def _sphere() -> CatalogueEntry:
    return CatalogueEntry(
        spec=MetricSpec.from_strings(
            [["1", "0"], ["0", "sin(x1)^2"]],
            ["0", "0"],
            [[0.5, 2.6], [-1.0, 1.0]],
            name="sphere",
        ),
        verdicts={
            Theorem.ISOTROPIC: True,
            Theorem.FLAT: False,
            Theorem.REVERSIBLE: True,
            Theorem.SQUARE: True,
            **ALL_IDENTITIES,
        },
        values=(
            ExpectedValue("Ric", (1.0, 0.0), (1.0, 0.0), 1.0, "unit sectional curvature"),
            ExpectedValue("PRic", (1.0, 0.0), (1.0, 0.0), 1.0, "PRic = Ric for beta = 0"),
        ),
        notes="Round unit sphere in geographic coordinates; c = 1.",
    )


def _polar() -> CatalogueEntry:
    return CatalogueEntry(
        spec=MetricSpec.from_strings(
            [["1", "0"], ["0", "x1^2"]],
            ["0", "0"],
            [[0.5, 2.0], [-1.0, 1.0]],
            name="polar",
        ),
        verdicts={
            Theorem.ISOTROPIC: True,
            Theorem.FLAT: True,
            Theorem.REVERSIBLE: True,
            Theorem.SQUARE: True,
            **ALL_IDENTITIES,
        },
        values=(
            ExpectedValue("Ric", (1.0, 0.3), (0.6, 0.8), 0.0, "flat plane in polar coordinates"),
        ),
        notes="Euclidean plane in polar coordinates.",
    )


def _shear() -> CatalogueEntry:
    return CatalogueEntry(
        spec=MetricSpec.from_strings(
            [["1", "0"], ["0", "1"]],
            ["0.5*x2", "0"],
            [[-0.8, 0.8], [-0.8, 0.8]],
            name="shear",
        ),
        verdicts={
            Theorem.FLAT: False,
            Theorem.REVERSIBLE: False,
            Theorem.SQUARE: False,
            **ALL_IDENTITIES,
        },
        notes="Shear 1-form on the plane: both r and s are nonzero.",
    )


def catalogue() -> list[CatalogueEntry]:
    return [
        _flat("flat_b0", 0.0),
        _flat("flat_b03", 0.3),
        _flat("flat_b05", 0.5),
        _funk(2, 0.55),
        _funk(3, 0.45),
        _killing(),
        _sphere(),
        _polar(),
        _shear(),
    ]


def catalogue_entry(name: str) -> CatalogueEntry:
    for entry in catalogue():
        if entry.name == name:
            return entry
    raise InvalidArgument(
        f"no catalogue entry '{name}', expected one of {[e.name for e in catalogue()]}"
    )


def _monomials(n: int, degree: int) -> list[tuple[int, ...]]:
    return [
        powers
        for total in range(degree + 1)
        for powers in itertools.product(range(total + 1), repeat=n)
        if sum(powers) == total
    ]


def _polynomial(constant: float, coefficients: np.ndarray, monomials: list[tuple[int, ...]]) -> str:
    terms = [repr(float(constant))] if constant else []
    for coefficient, powers in zip(coefficients, monomials):
        if coefficient == 0:
            continue
        factors = [repr(abs(float(coefficient)))]
        factors += [
            f"x{i + 1}" if p == 1 else f"x{i + 1}^{p}" for i, p in enumerate(powers) if p
        ]
        body = "*".join(factors)
        if terms:
            terms.append(f"{'-' if coefficient < 0 else '+'} {body}")
        else:
            terms.append(f"-{body}" if coefficient < 0 else body)
    return " ".join(terms) if terms else "0"


def admissibility_points(
    spec: MetricSpec, count: int = ConfDefaultInt.ADMISSIBILITY_POINTS
) -> np.ndarray:
    """A regular grid of at least `count` points over the domain box."""
    per_axis = max(2, math.ceil(count ** (1.0 / spec.dimension)))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in spec.domain]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def is_admissible_on_grid(spec: MetricSpec, points: np.ndarray, max_b: float) -> bool:
    try:
        a, b = spec.coefficient_grid(points)
    except ExpressionDomainError:
        return False
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        return False
    if np.linalg.eigvalsh(a).min() <= 0:
        return False
    norm_sq = np.einsum("pi,pi->p", b, np.linalg.solve(a, b[..., None])[..., 0])
    return bool(norm_sq.max() < max_b**2)


def random_randers(
    seed: int,
    n: int = 2,
    degree: int = 2,
    amplitude: float = 0.05,
    *,
    attempts: int = ConfDefaultInt.RANDOM_SPEC_ATTEMPTS,
) -> MetricSpec:
    """A random polynomial Randers metric on [-0.5, 0.5]^n, deterministic per seed.

    a_ij = delta_ij + a symmetric polynomial perturbation and b_i a polynomial
    covector, every coefficient uniform in [-amplitude, amplitude]. A draw is
    kept once a is positive definite and b < 0.9 on the admissibility grid.
    """
    if n not in (2, 3, 4):
        raise InvalidArgument(f"random metrics are generated for n in 2..4, got {n}")
    if degree < 0 or amplitude < 0:
        raise InvalidArgument("degree and amplitude must be non-negative")

    rng = np.random.default_rng(seed)
    monomials = _monomials(n, degree)
    half = RANDOM_SPEC_DOMAIN_HALF_WIDTH
    name = f"random-n{n}-d{degree}-s{seed}"

    for attempt in range(1, attempts + 1):
        a = [[""] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                coefficients = rng.uniform(-amplitude, amplitude, len(monomials))
                a[i][j] = a[j][i] = _polynomial(1.0 if i == j else 0.0, coefficients, monomials)
        b = [
            _polynomial(0.0, rng.uniform(-amplitude, amplitude, len(monomials)), monomials)
            for _ in range(n)
        ]
        spec = MetricSpec.from_strings(a, b, [[-half, half]] * n, name=name)
        points = admissibility_points(spec)
        if is_admissible_on_grid(spec, points, RANDOM_SPEC_ADMISSIBLE_B):
            _LOGGER.debug(f"Generated {name} after {attempt} attempt(s)")
            return spec
        _LOGGER.debug(f"Rejected draw {attempt} of {name}")

    raise GeneratorGaveUp(f"no admissible {name} in {attempts} attempts")


def export_catalogue(directory: str | Path, entries: Sequence[CatalogueEntry] | None = None) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for entry in entries if entries is not None else catalogue():
        path = directory / f"{entry.name}.json"
        dump_metric_spec(entry.spec, path)
        paths.append(path)
    _LOGGER.info(f"Exported {len(paths)} metric specs to {directory}")
    return paths


@dataclass(frozen=True)
class ZooOutcome:
    entry: str
    check: str
    expected: bool
    observed: bool
    detail: str = ""

    @property
    def matches(self) -> bool:
        return self.expected == self.observed


def check_value(spec: MetricSpec, expected: ExpectedValue) -> ZooOutcome:
    try:
        value = float(evaluate_quantity(expected.quantity, spec, expected.x, expected.y))
    except RandersCurvatureException as e:
        return ZooOutcome(spec.name, f"value:{expected.quantity}", True, False, f"{e}")
    error = abs(value - expected.value) / max(abs(expected.value), 1.0)
    return ZooOutcome(
        spec.name,
        f"value:{expected.quantity}",
        True,
        error <= expected.tolerance,
        f"{value!r} vs {expected.value!r} ({expected.provenance})",
    )


async def async_run_entry(
    entry: CatalogueEntry,
    *,
    samples: int = ConfDefaultInt.ZOO_SAMPLES,
    seed: int = ConfDefaultInt.SEED,
    tolerances: Tolerances | None = None,
    workers: int = ConfDefaultInt.WORKERS,
) -> list[ZooOutcome]:
    """Reproduce the entry's documented values and verdicts.

    Every entry also gets a `reversible-consistent` outcome: the reversibility
    conditions must pass exactly when PRic(y) = PRic(-y) does.
    """
    draws = draw_samples(entry.spec, samples, seed)
    outcomes = [check_value(entry.spec, value) for value in entry.values]
    options = {"tolerances": tolerances, "workers": workers}
    reversible = None

    for check, expected in entry.verdicts.items():
        if check in THEOREMS:
            report = await async_verify(entry.spec, check, draws, c=FIT, **options)
            if check == Theorem.REVERSIBLE:
                reversible = report
        else:
            report = await async_check_identity(entry.spec, check, draws, seed=seed, **options)
        outcomes.append(_verdict_outcome(entry.name, str(check), expected, report))

    if reversible is None:
        reversible = await async_verify(entry.spec, Theorem.REVERSIBLE, draws, **options)
    consistent = bool(reversible.extras["consistent"])
    outcome = ZooOutcome(
        entry.name,
        REVERSIBLE_CONSISTENT,
        True,
        consistent,
        f"conditions {_verdict(reversible.extras['conditions_pass'])}, "
        f"direct {_verdict(reversible.extras['direct_pass'])}",
    )
    if not consistent:
        _LOGGER.warning(f"{entry.name}: reversibility conditions disagree with PRic(y) = PRic(-y)")
    outcomes.append(outcome)
    return outcomes


def _verdict(passed: bool) -> str:
    return "pass" if passed else "fail"


def _verdict_outcome(
    name: str, check: str, expected: bool, report: VerificationReport
) -> ZooOutcome:
    worst = max(report.conditions.values(), key=lambda c: c.max_residual / c.tolerance)
    outcome = ZooOutcome(
        name,
        check,
        expected,
        report.passed,
        f"{worst.name} = {worst.max_residual:.3e} (tol {worst.tolerance:.0e})",
    )
    if not outcome.matches:
        _LOGGER.warning(f"{name}: {check} expected {expected}, got {report.passed}")
    return outcome


async def async_run_all(
    entries: Sequence[CatalogueEntry] | None = None, **kwargs
) -> list[ZooOutcome]:
    """Run every documented verdict of every catalogue entry."""
    outcomes = []
    for entry in entries if entries is not None else catalogue():
        _LOGGER.debug(f"Running catalogue entry {entry.name}")
        outcomes.extend(await async_run_entry(entry, **kwargs))
    return outcomes
