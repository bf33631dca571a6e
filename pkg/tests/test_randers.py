"""Tests for the Randers closed forms, identities and verifiers."""

from __future__ import annotations

import numpy as np
import pytest

from randers_curvature import finsler
from randers_curvature.config import Tolerances
from randers_curvature.const import (
    E_IDENTITY_SIGN,
    FIT,
    Identity,
    PRicForm,
    Theorem,
    VolumeForm,
)
from randers_curvature.exceptions import InvalidArgument, NoAdmissibleSamples
from randers_curvature.expr import parse
from randers_curvature.randers import (
    QUANTITIES,
    VOLUME_RHO,
    async_check_identity,
    async_fit_isotropic_s,
    async_verify,
    calibrate_e_sign,
    calibrate_pric_form,
    e_coefficients,
    e_identity_lhs,
    evaluate_quantity,
    fit_isotropic_s_at,
    n_coefficients,
    pric_closed,
    pric_randers,
    randers_point,
    third_derivative_closed_form,
    verify,
)
from randers_curvature.sampling import Sample, draw_samples
from tests.conftest import assert_close, central_gradient, make_spec


class TestClosedForm:
    """The invariant closed form against the definitional pipeline."""

    def test_matches_generic(self, random_spec, random_samples):
        for sample in random_samples:
            generic = finsler.pric_generic(random_spec, sample.x, sample.y)
            closed = pric_randers(random_spec, sample.x, sample.y)
            F = finsler.finsler_norm(random_spec, sample.x, sample.y)
            assert abs(closed - generic) <= 1e-9 * (abs(generic) + F**2)

    def test_expanded_offset(self, random_spec, random_samples):
        for sample in random_samples:
            d = randers_point(random_spec, sample.x).direction(sample.y)
            offset = (d.n - 1) * d.alpha * d.s0 * d.e00 / d.F**2
            expanded = pric_randers(random_spec, sample.x, sample.y, form="expanded")
            assert expanded == pytest.approx(pric_closed(d) - offset, rel=1e-12, abs=1e-15)

    def test_forms_agree_without_s0(self, sphere):
        x, y = [1.1, 0.3], [0.4, -0.9]
        assert pric_randers(sphere, x, y, form=PRicForm.EXPANDED) == pric_randers(sphere, x, y)

    def test_calibrated_form(self, random_spec, random_samples):
        assert calibrate_pric_form(random_spec, random_samples) is PRicForm.INVARIANT

    def test_unknown_volume_form(self, flat_spec):
        with pytest.raises(InvalidArgument):
            pric_randers(flat_spec, [0, 0], [1, 0], volume_form="Holmes-Thompson")
        with pytest.raises(InvalidArgument):
            randers_point(flat_spec, [0, 0], volume_form="HT")

    def test_bh_rho_is_log_density_ratio(self, random_spec):
        """rho_0 is the y-contraction of d ln(sigma_BH / sqrt(det a)) / (n + 1)."""
        n = random_spec.dimension
        x = np.array([0.1, -0.2, 0.05])[:n]
        y = np.array([0.7, 0.2, -0.4])[:n]

        def log_ratio(p):
            a, _ = random_spec.coefficients(p)
            sigma = finsler.bh_volume_density(random_spec, p)
            return np.log(sigma / np.sqrt(np.linalg.det(a))) / (n + 1)

        point = randers_point(random_spec, x, VolumeForm.BUSEMANN_HAUSDORFF)
        assert point.volume_form is VolumeForm.BUSEMANN_HAUSDORFF
        expected = central_gradient(log_ratio, x) @ y
        assert point.direction(y).rho0 == pytest.approx(expected, rel=1e-5, abs=1e-7)

    def test_volume_form_selects_rho(self, random_spec, monkeypatch):
        x = np.array([0.1, -0.2, 0.05])[: random_spec.dimension]
        y = np.array([0.7, 0.2, -0.4])[: random_spec.dimension]
        bh = pric_randers(random_spec, x, y, volume_form="BH")
        zero = np.zeros(random_spec.dimension)
        monkeypatch.setitem(
            VOLUME_RHO,
            VolumeForm.BUSEMANN_HAUSDORFF,
            lambda suite: (zero, np.zeros((len(zero), len(zero)))),
        )
        assert pric_randers(random_spec, x, y, volume_form="BH") != pytest.approx(bh, rel=1e-9)


class TestPolynomials:
    """E and N coefficients in alpha."""

    def test_e_sign(self, random_spec, random_samples):
        assert calibrate_e_sign(random_spec, random_samples, c=0.3) == E_IDENTITY_SIGN

    @pytest.mark.parametrize("c", [-0.7, 0.0, 0.4])
    def test_e_identity(self, random_spec, random_samples, c):
        for sample in random_samples:
            d = randers_point(random_spec, sample.x).direction(sample.y)
            poly = E_IDENTITY_SIGN * e_coefficients(d, c).polynomial(d.alpha)
            assert poly == pytest.approx(e_identity_lhs(d, c), rel=1e-10, abs=1e-13)

    def test_e_flat(self, flat_spec):
        d = randers_point(flat_spec, [0.1, 0.1]).direction([0.6, 0.8])
        assert all(v == 0 for v in vars(e_coefficients(d, 0.0)).values())
        # only the c F^4 term survives
        assert e_coefficients(d, 0.5).polynomial(d.alpha) == pytest.approx(-0.5 * d.F**4)

    def test_n_relation(self, random_spec, random_samples):
        for sample in random_samples:
            d = randers_point(random_spec, sample.x).direction(sample.y)
            N = n_coefficients(d)
            assert N.n2 == pytest.approx(2 * d.beta * N.n3, rel=1e-12, abs=1e-15)

    def test_odd_part(self, random_spec, random_samples):
        for sample in random_samples:
            point = randers_point(random_spec, sample.x)
            d = point.direction(sample.y)
            odd = pric_closed(d) - pric_closed(point.direction(-sample.y))
            shift = 2 * (d.n - 1) * d.alpha * d.s0 * d.e00
            assert n_coefficients(d).polynomial(d.alpha) == pytest.approx(
                d.F**2 * odd - shift, rel=1e-9, abs=1e-12
            )


class TestThirdDerivatives:
    @pytest.mark.parametrize("quantity", ["F", "F2"])
    def test_match_pipeline(self, random_spec, quantity):
        x = np.array([0.1, -0.2, 0.05])[: random_spec.dimension]
        y = np.array([0.7, 0.2, -0.4])[: random_spec.dimension]
        assert_close(
            third_derivative_closed_form(quantity, random_spec, x, y),
            finsler.vertical_third_derivative(quantity, random_spec, x, y),
            rtol=1e-9,
            atol=1e-11,
        )

    def test_displayed_variant_differs(self, flat_spec):
        x, y = [0.0, 0.0], [0.6, 0.8]
        exact = third_derivative_closed_form("F2", flat_spec, x, y)
        displayed = third_derivative_closed_form("F2", flat_spec, x, y, displayed=True)
        assert np.abs(exact - displayed).max() > 1e-3

    def test_no_closed_form_for_ricci(self, flat_spec):
        with pytest.raises(InvalidArgument):
            third_derivative_closed_form("Ric", flat_spec, [0, 0], [1, 0])


class TestVerifiers:
    """Theorem verdicts on metrics whose answer is known."""

    async def test_funk_is_flat(self, funk2):
        report = await async_verify(funk2, Theorem.FLAT, draw_samples(funk2, 6, 0))
        assert report.passed
        assert report.target == "flat"

    async def test_sphere_isotropic_fit(self, sphere):
        report = await async_verify(sphere, "isotropic", draw_samples(sphere, 6, 0), c=FIT)
        assert report.passed
        assert report.extras["c_constant"]
        assert report.extras["c_min"] == pytest.approx(1.0, rel=1e-9)
        assert report.extras["c_max"] == pytest.approx(1.0, rel=1e-9)

    async def test_sphere_isotropic_expression(self, sphere):
        c = parse("1 + 0*x2", 2)
        report = await async_verify(sphere, "isotropic", draw_samples(sphere, 4, 0), c=c)
        assert report.passed
        assert report.extras["c"] == c.to_source()

    async def test_sphere_is_not_flat(self, sphere):
        report = await async_verify(sphere, "flat", draw_samples(sphere, 4, 0))
        assert not report.passed
        assert not report.conditions["ricci_identity"].passed

    async def test_killing_not_reversible(self, killing):
        report = await async_verify(killing, "reversible", draw_samples(killing, 6, 0))
        assert not report.passed
        assert report.extras["consistent"]
        assert report.conditions["direct_reversibility"].informational

    async def test_flat_reversible(self, flat_spec):
        report = await async_verify(flat_spec, "reversible", draw_samples(flat_spec, 4, 0))
        assert report.passed
        assert report.extras == {"conditions_pass": True, "direct_pass": True, "consistent": True}

    async def test_square(self, flat_spec, killing):
        assert (await async_verify(flat_spec, "square", draw_samples(flat_spec, 3, 0))).passed
        report = await async_verify(killing, "square", draw_samples(killing, 3, 0))
        assert not report.passed
        assert report.conditions["pric_third_derivative"].max_residual > 1e-6

    async def test_generic_metric_is_not_square(self, random_spec):
        report = await async_verify(random_spec, "square", draw_samples(random_spec, 2, 0))
        assert not report.passed
        assert report.conditions["pric_third_derivative"].max_residual > 1e-3

    async def test_square_witnesses_vanishing_beta(self, flat_spec):
        euclidean = make_spec([["1", "0"], ["0", "1"]], ["0", "0"])
        report = await async_verify(euclidean, "square", draw_samples(euclidean, 2, 0))
        assert report.passed
        assert report.extras["beta_vanishes"] is True

        report = await async_verify(flat_spec, "square", draw_samples(flat_spec, 2, 0))
        assert report.passed
        assert report.extras["beta_vanishes"] is False

    async def test_all_samples_skipped(self):
        spec = make_spec([["1", "0"], ["0", "1"]], ["x1", "0"], [[-2, 2], [-1, 1]])
        samples = [Sample(x=np.array([1.5, 0.0]), y=np.array([1.0, 0.0]))]
        with pytest.raises(NoAdmissibleSamples):
            await async_verify(spec, "flat", samples)

    def test_blocking_wrapper(self, flat_spec):
        assert verify(flat_spec, "flat", draw_samples(flat_spec, 3, 0), workers=2).passed


class TestIsotropicS:
    def test_funk_fit(self, funk2):
        fit = fit_isotropic_s_at(funk2, [0.1, -0.2], [0.6, 0.8])
        assert fit.c == pytest.approx(0.5, rel=1e-9)
        assert fit.spread < 1e-10
        assert fit.c0 == pytest.approx(0.0, abs=1e-9)
        assert fit.pric_form_residual < 1e-7

    async def test_funk_report(self, funk3):
        report = await async_fit_isotropic_s(funk3, draw_samples(funk3, 3, 0))
        assert report.passed
        assert report.target == "isotropicS"
        assert report.extras["c_min"] == pytest.approx(0.5, rel=1e-9)


class TestIdentities:
    """The cross-checks hold on generic metrics."""

    @pytest.mark.parametrize("identity", list(Identity))
    async def test_identity_holds(self, random_spec, random_samples, identity):
        report = await async_check_identity(random_spec, identity, random_samples, seed=7)
        assert report.passed, {n: c.max_residual for n, c in report.conditions.items()}

    async def test_epoly_flat_is_exact(self, flat_spec):
        report = await async_check_identity(
            flat_spec, "epoly", draw_samples(flat_spec, 4, 0), c=0.0
        )
        assert report.conditions["e_polynomial"].max_residual == 0.0
        assert report.extras == {"e_sign": E_IDENTITY_SIGN}

    async def test_epoly_draws_per_sample(self, random_spec, random_samples):
        report = await async_check_identity(random_spec, "epoly", random_samples, seed=11)
        constants = {r.values["c"] for r in report.records}
        assert len(constants) == len(random_samples)
        assert all(-1 <= c <= 1 for c in constants)

    async def test_two_path_checks_bh_quadrature_in_the_plane(self, funk2, funk3):
        report = await async_check_identity(funk2, "sTwoPath", draw_samples(funk2, 3, 0))
        condition = report.conditions["bh_quadrature"]
        assert condition.passed
        assert condition.tolerance == Tolerances().finite_difference
        assert all(r.values["sigma_BH"] > 0 for r in report.records)

        report = await async_check_identity(funk3, "sTwoPath", draw_samples(funk3, 2, 0))
        assert set(report.conditions) == {"s_two_path"}


class TestQuantities:
    def test_every_quantity_evaluates(self, funk2):
        for name in QUANTITIES:
            value = evaluate_quantity(name, funk2, [0.1, 0.2], [1.0, -0.5])
            assert np.all(np.isfinite(value)), name

    def test_unknown(self, funk2):
        with pytest.raises(InvalidArgument):
            evaluate_quantity("flag", funk2, [0, 0], [1, 0])

    def test_wrong_dimension(self, funk2):
        with pytest.raises(InvalidArgument):
            evaluate_quantity("F", funk2, [0, 0, 0], [1, 0, 0])
