"""Deterministic sample draws and the per-sample worker fan-out."""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .const import ConfDefaultInt
from .exceptions import (
    ExpressionDomainError,
    InadmissiblePoint,
    JetDomainError,
    NoAdmissibleSamples,
    VerificationTimeout,
)
from .metric import MetricSpec

_LOGGER = logging.getLogger(__name__)

# Failures that disqualify one sample without failing the run.
SKIPPABLE = (InadmissiblePoint, ExpressionDomainError, JetDomainError)


@dataclass(frozen=True)
class Sample:
    x: np.ndarray
    y: np.ndarray  # alpha-unit


@dataclass(frozen=True)
class SampleOutcome:
    sample: Sample
    result: Any = None
    skipped: str | None = None


@dataclass
class RunStats:
    """Counters for one fan-out run."""

    evaluated: int = 0
    skipped: int = 0
    last_error: str | None = field(default=None, repr=False)


def alpha_unit(a: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map a Euclidean unit vector to an alpha-unit vector (a = L L^T, y = L^-T u)."""
    chol = np.linalg.cholesky(a)
    return np.linalg.solve(chol.T, u)


def draw_samples(spec: MetricSpec, count: int, seed: int) -> list[Sample]:
    """Draw `count` admissible points with alpha-unit directions.

    Points are uniform in the domain box, rejected when the metric is not
    admissible there; directions are uniform on the alpha-unit sphere. The
    stream is numpy's PCG64 seeded with `seed`, so draws are reproducible.
    """
    rng = np.random.default_rng(seed)
    lower, upper = spec.lower, spec.upper
    n = spec.dimension

    samples: list[Sample] = []
    attempts = 0
    limit = max(count, 1) * ConfDefaultInt.REJECTION_FACTOR
    while len(samples) < count and attempts < limit:
        attempts += 1
        x = rng.uniform(lower, upper)
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        try:
            a, _ = spec.check_admissible(x)
        except (InadmissiblePoint, ExpressionDomainError) as e:
            _LOGGER.debug(f"Rejected sample x={x.tolist()}: {e}")
            continue
        samples.append(Sample(x=x, y=alpha_unit(a, u)))

    if not samples:
        raise NoAdmissibleSamples(
            f"no admissible point of '{spec.name}' found in {attempts} draws"
        )
    if len(samples) < count:
        _LOGGER.warning(
            f"Only {len(samples)} of {count} admissible samples of '{spec.name}' "
            f"after {attempts} draws"
        )
    return samples


def draw_coefficients(seed: int, count: int, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Per-sample constants (the random c of the E-polynomial check).

    Uses a stream separate from the sample draws so the points stay the same
    whether or not constants are drawn.
    """
    return np.random.default_rng([seed, 1]).uniform(low, high, size=count)


async def async_map_samples(
    func: Callable[[Sample], Any],
    samples: list[Sample],
    *,
    workers: int = ConfDefaultInt.WORKERS,
    timeout: float | None = None,
    stats: RunStats | None = None,
) -> list[SampleOutcome]:
    """Run `func` on every sample in worker threads, keeping the input order.

    Samples whose evaluation raises one of SKIPPABLE are reported as skipped.
    """
    semaphore = asyncio.Semaphore(max(1, workers))
    stats = stats if stats is not None else RunStats()

    async def _run(sample: Sample) -> SampleOutcome:
        async with semaphore:
            try:
                result = await asyncio.to_thread(func, sample)
            except SKIPPABLE as e:
                _LOGGER.info(f"Skipping x={sample.x.tolist()}: {e}")
                stats.skipped += 1
                stats.last_error = f"{e}"
                return SampleOutcome(sample=sample, skipped=f"{e}")
            stats.evaluated += 1
            return SampleOutcome(sample=sample, result=result)

    try:
        async with asyncio.timeout(timeout):
            return list(await asyncio.gather(*(_run(s) for s in samples)))
    except TimeoutError:
        raise VerificationTimeout(
            f"evaluation of {len(samples)} samples exceeded {timeout} s "
            f"({stats.evaluated} finished)"
        )
