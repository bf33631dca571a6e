"""Tests for the definitional Finsler pipeline."""

from __future__ import annotations

import numpy as np
import pytest

from randers_curvature import finsler
from randers_curvature.exceptions import (
    InadmissiblePoint,
    InvalidArgument,
    UnsupportedJetOrder,
)
from randers_curvature.finsler import PhasePipeline
from randers_curvature.metric import metric_spec_from_dict, metric_spec_to_dict
from randers_curvature.randers import s_curvature_randers, spray_randers
from randers_curvature.riemann import alpha_ricci
from tests.conftest import assert_close, central_hessian, make_spec


def _point(spec):
    x = np.array([0.12, -0.21, 0.08])[: spec.dimension]
    y = np.array([0.6, 0.3, -0.5])[: spec.dimension]
    return x, y


class TestFlat:
    """Constant b on the Euclidean plane: every curvature vanishes."""

    def test_norm(self, flat_spec):
        assert finsler.finsler_norm(flat_spec, [0.2, 0.1], [1.0, 0.0]) == 1.5

    def test_curvature_vanishes(self, flat_spec):
        result = finsler.evaluate(flat_spec, [0.2, 0.1], [0.6, -0.8])
        assert np.abs(result.spray).max() < 1e-14
        assert abs(result.S) < 1e-14
        assert abs(result.ricci) < 1e-14
        assert abs(result.pric) < 1e-14

    def test_fundamental_tensor(self, flat_spec):
        g = finsler.fundamental_tensor(flat_spec, [0.0, 0.0], [1.0, 0.0])
        assert g[0, 0] == pytest.approx(2.25, rel=1e-14)

    def test_bh_density(self, flat_spec):
        assert finsler.bh_volume_density(flat_spec, [0.0, 0.0]) == pytest.approx(
            0.649519052838329, rel=1e-14
        )

    def test_bh_density_quadrature(self, flat_spec, funk2):
        assert finsler.bh_volume_density_quadrature(flat_spec, [0.0, 0.0]) == pytest.approx(
            0.649519052838329, rel=1e-6
        )
        x = [0.2, -0.3]
        assert finsler.bh_volume_density_quadrature(funk2, x) == pytest.approx(
            finsler.bh_volume_density(funk2, x), rel=1e-6
        )

    def test_quadrature_needs_plane(self, funk3):
        with pytest.raises(InvalidArgument):
            finsler.bh_volume_density_quadrature(funk3, [0.0, 0.0, 0.0])


class TestFunk:
    """The Funk metric has S = (n+1)/2 F and flag curvature -1/4."""

    @pytest.mark.parametrize("spec_name", ["funk2", "funk3"])
    def test_s_and_ricci(self, spec_name, request):
        spec = request.getfixturevalue(spec_name)
        n = spec.dimension
        x, y = _point(spec)
        result = finsler.evaluate(spec, x, y)
        assert result.S == pytest.approx((n + 1) / 2 * result.F, rel=1e-9)
        assert result.ricci == pytest.approx(-(n - 1) / 4 * result.F**2, rel=1e-7)

    def test_spray(self, funk2):
        G = finsler.spray(funk2, [0.3, 0.0], [1.0, 0.0])
        assert_close(G, [0.5 * 1.3 / 0.91, 0.0], rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("spec_name", ["funk2", "funk3"])
    def test_projectively_ricci_flat(self, spec_name, request):
        spec = request.getfixturevalue(spec_name)
        x, y = _point(spec)
        F = finsler.finsler_norm(spec, x, y)
        assert abs(finsler.pric_generic(spec, x, y)) < 1e-7 * F**2

    def test_distortion_vanishes_where_b_does(self, funk2):
        assert abs(finsler.distortion(funk2, [0.0, 0.0], [0.3, 0.9])) < 1e-14


class TestGeneric:
    """Consistency of the pipeline on perturbed metrics."""

    def test_fundamental_tensor(self, random_spec):
        x, y = _point(random_spec)
        g = finsler.fundamental_tensor(random_spec, x, y)
        assert np.all(np.linalg.eigvalsh(g) > 0)
        expected = central_hessian(lambda v: 0.5 * finsler.finsler_norm(random_spec, x, v) ** 2, y)
        assert_close(g, expected, rtol=1e-5, atol=1e-6)

    def test_fundamental_tensor_reproduces_norm(self, random_spec):
        x, y = _point(random_spec)
        g = finsler.fundamental_tensor(random_spec, x, y)
        F = finsler.finsler_norm(random_spec, x, y)
        assert y @ g @ y == pytest.approx(F**2, rel=1e-12)

    def test_riemannian_ricci_is_alpha_ricci(self, random_spec):
        """With beta removed the Finsler Ricci curvature is the Riemannian one."""
        data = metric_spec_to_dict(random_spec)
        data["b"] = ["0"] * random_spec.dimension
        spec = metric_spec_from_dict(data)
        x, y = _point(spec)
        expected = alpha_ricci(spec, x, y)
        assert expected != 0.0
        assert finsler.ricci(spec, x, y) == pytest.approx(expected, rel=1e-9, abs=1e-14)

    def test_spray_closed_form(self, random_spec):
        x, y = _point(random_spec)
        assert_close(finsler.spray(random_spec, x, y), spray_randers(random_spec, x, y), atol=1e-12)

    def test_spray_homogeneous(self, random_spec):
        x, y = _point(random_spec)
        assert_close(finsler.spray(random_spec, x, 2.5 * y), 6.25 * finsler.spray(random_spec, x, y))

    def test_s_curvature_closed_form(self, random_spec):
        x, y = _point(random_spec)
        assert finsler.s_curvature(random_spec, x, y) == pytest.approx(
            s_curvature_randers(random_spec, x, y), rel=1e-9, abs=1e-12
        )

    def test_s_curvature_two_paths(self, random_spec):
        x, y = _point(random_spec)
        assert finsler.s_curvature_transported(random_spec, x, y) == pytest.approx(
            finsler.s_curvature(random_spec, x, y), rel=1e-8, abs=1e-12
        )

    def test_riemann_trace_is_ricci(self, random_spec):
        x, y = _point(random_spec)
        R = finsler.riemann_curvature(random_spec, x, y)
        assert np.trace(R) == pytest.approx(finsler.ricci(random_spec, x, y), rel=1e-12, abs=1e-15)
        # R^i_k y^k = 0
        assert np.abs(R @ y).max() < 1e-10

    def test_riemannian_distortion(self):
        spec = make_spec([["1", "0"], ["0", "x1^2"]], ["0", "0"], [[0.5, 2], [-1, 1]])
        assert abs(finsler.distortion(spec, [1.3, 0.2], [0.4, 0.7])) < 1e-13

    def test_vertical_third_derivative_symmetric(self, random_spec):
        x, y = _point(random_spec)
        third = finsler.vertical_third_derivative("F2", random_spec, x, y)
        assert_close(third, np.einsum("jkl->ljk", third), atol=1e-14)
        # F^2 is 2-homogeneous, so its third y-derivatives contract y to zero
        assert np.abs(np.einsum("jkl,l->jk", third, y)).max() < 1e-10


class TestErrors:
    def test_budget_too_small(self, flat_spec):
        pipeline = PhasePipeline(flat_spec, [0.0, 0.0], [1.0, 0.0], x_order=1, y_order=3)
        with pytest.raises(UnsupportedJetOrder):
            pipeline.riemann

    def test_zero_direction(self, flat_spec):
        with pytest.raises(InadmissiblePoint):
            PhasePipeline(flat_spec, [0.0, 0.0], [0.0, 0.0])

    def test_wrong_shape(self, flat_spec):
        with pytest.raises(InvalidArgument):
            PhasePipeline(flat_spec, [0.0, 0.0, 0.0], [1.0, 0.0])

    def test_unknown_vertical_quantity(self, flat_spec):
        with pytest.raises(InvalidArgument):
            finsler.vertical_third_derivative("tau", flat_spec, [0.0, 0.0], [1.0, 0.0])

    def test_outside_strong_convexity(self):
        spec = make_spec([["1", "0"], ["0", "1"]], ["x1", "0"], [[-2, 2], [-1, 1]])
        with pytest.raises(InadmissiblePoint):
            finsler.pric_generic(spec, [1.5, 0.0], [1.0, 0.0])
