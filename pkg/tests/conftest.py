"""Common fixtures and numerical oracles for randers-curvature tests."""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
import pytest

from randers_curvature.metric import MetricSpec
from randers_curvature.sampling import Sample, draw_samples
from randers_curvature.zoo import catalogue_entry, random_randers

FD_STEP = 1e-4


def make_spec(
    a: Sequence[Sequence[str]],
    b: Sequence[str],
    domain: Sequence[Sequence[float]] | None = None,
    name: str = "test",
) -> MetricSpec:
    """Build a MetricSpec from coefficient strings (default domain [-0.5, 0.5]^n)."""
    n = len(b)
    return MetricSpec.from_strings(a, b, domain or [[-0.5, 0.5]] * n, name=name)


def flat_randers(b1: float = 0.5, b2: float = 0.0) -> MetricSpec:
    return make_spec([["1", "0"], ["0", "1"]], [repr(b1), repr(b2)], name="flat")


def central_gradient(
    func: Callable[[np.ndarray], np.ndarray | float], x: Sequence[float], h: float = FD_STEP
) -> np.ndarray:
    """d func / d x_k by central differences, derivative index first."""
    x = np.asarray(x, dtype=float)
    slices = []
    for k in range(len(x)):
        step = np.zeros_like(x)
        step[k] = h
        slices.append((np.asarray(func(x + step)) - np.asarray(func(x - step))) / (2 * h))
    return np.array(slices)


def central_hessian(
    func: Callable[[np.ndarray], float], x: Sequence[float], h: float = FD_STEP
) -> np.ndarray:
    return central_gradient(lambda p: central_gradient(func, p, h), x, h)


def assert_close(actual, expected, rtol: float = 1e-5, atol: float = 1e-8) -> None:
    np.testing.assert_allclose(np.asarray(actual), np.asarray(expected), rtol=rtol, atol=atol)


@pytest.fixture
def flat_spec() -> MetricSpec:
    """Flat Randers metric with b = (0.5, 0)."""
    return flat_randers()


@pytest.fixture
def funk2() -> MetricSpec:
    return catalogue_entry("funk2").spec


@pytest.fixture
def funk3() -> MetricSpec:
    return catalogue_entry("funk3").spec


@pytest.fixture
def killing() -> MetricSpec:
    return catalogue_entry("killing").spec


@pytest.fixture
def sphere() -> MetricSpec:
    return catalogue_entry("sphere").spec


@pytest.fixture(params=[(1, 2), (2, 2), (3, 3)], ids=lambda p: f"seed{p[0]}-n{p[1]}")
def random_spec(request) -> MetricSpec:
    """A perturbed flat metric, generic enough that no curvature term vanishes."""
    seed, n = request.param
    return random_randers(seed, n, degree=2, amplitude=0.05)


@pytest.fixture
def random_samples(random_spec) -> list[Sample]:
    return draw_samples(random_spec, 5, seed=3)
