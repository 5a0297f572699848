import numpy as np
import pytest
from scipy.integrate import quad

from dyadeconv import (
    ComponentDist,
    FreqGrid,
    ModelConfig,
    analytic_cf,
    analytic_cf_deriv,
    analytic_density,
    compose_phi_Y_slices,
    ecf,
    component_generators,
    draw,
    validate_cf_curve,
)
from conftest import ALL_KINDS, normal, laplace, uniform, two_point, shifted_exp, sup_err


def quad_cf(dist, s):
    """Independent oracle: E exp(isX) by numerical quadrature of the density."""
    if dist.kind == "two_point_symmetric":
        return complex(np.cos(dist.scale * s))
    if dist.kind == "uniform_symmetric":
        lo, hi = -dist.scale, dist.scale
    elif dist.kind == "shifted_exponential":
        lo, hi = -dist.scale, np.inf
    else:
        lo, hi = -np.inf, np.inf
    re = quad(lambda x: np.cos(s * x) * analytic_density(dist, np.array([x]))[0],
              lo, hi, limit=400)[0]
    im = quad(lambda x: np.sin(s * x) * analytic_density(dist, np.array([x]))[0],
              lo, hi, limit=400)[0]
    return complex(re, im)


class TestAnalyticCF:
    @pytest.mark.parametrize("dist", ALL_KINDS, ids=lambda d: d.kind)
    def test_value_one_at_origin(self, dist):
        g = FreqGrid(3.0, 61)
        assert analytic_cf(dist, g).value_at_zero() == 1.0

    @pytest.mark.parametrize("dist", ALL_KINDS, ids=lambda d: d.kind)
    @pytest.mark.parametrize("s", [0.5, 1.7, 2.9])
    def test_matches_quadrature_oracle(self, dist, s):
        g = FreqGrid(s, 3)  # grid points -s, 0, s
        val = analytic_cf(dist, g).values[-1]
        assert val == pytest.approx(quad_cf(dist, s), abs=1e-7)

    def test_normal_at_two(self):
        g = FreqGrid(2.0, 3)
        val = analytic_cf(normal(1.0), g).values[-1]
        assert val == pytest.approx(np.exp(-2.0), abs=1e-12)  # 0.1353...

    def test_uniform_zero_at_pi_with_nonzero_derivative(self):
        # zeros of the CF and of its derivative are disjoint for this law
        g = FreqGrid(np.pi, 3)
        assert abs(analytic_cf(uniform(1.0), g).values[-1]) < 1e-15
        dval = analytic_cf_deriv(uniform(1.0), g).values[-1]
        assert dval == pytest.approx(-1.0 / np.pi, abs=1e-12)

    def test_two_point_zeros_have_nonzero_derivative(self):
        for z in (np.pi / 2, 3 * np.pi / 2):
            g = FreqGrid(z, 3)
            assert abs(analytic_cf(two_point(1.0), g).values[-1]) < 1e-15
            assert abs(analytic_cf_deriv(two_point(1.0), g).values[-1]) == pytest.approx(1.0, abs=1e-12)

    def test_shifted_exponential_has_no_real_zeros(self):
        g = FreqGrid(50.0, 5001)
        assert analytic_cf(shifted_exp(2.0), g).modulus().min() > 0.0

    @pytest.mark.parametrize("dist", ALL_KINDS, ids=lambda d: d.kind)
    def test_cf_invariants_at_1e_minus_12(self, dist):
        g = FreqGrid(4.0, 801)
        assert validate_cf_curve(analytic_cf(dist, g), tol=1e-12).passed


class TestAnalyticDeriv:
    @pytest.mark.parametrize("dist", ALL_KINDS, ids=lambda d: d.kind)
    def test_zero_at_origin(self, dist):
        g = FreqGrid(3.0, 61)
        assert analytic_cf_deriv(dist, g).value_at_zero() == 0.0  # zero means

    @pytest.mark.parametrize("dist", ALL_KINDS, ids=lambda d: d.kind)
    def test_matches_central_difference(self, dist):
        # spacing 1e-3 central difference, tolerance 1e-6
        eps = 1e-3
        for s in (0.35, 1.0, 2.4):
            gp = FreqGrid(s + eps, 3)
            gm = FreqGrid(s - eps, 3)
            g = FreqGrid(s, 3)
            fd = (analytic_cf(dist, gp).values[-1] - analytic_cf(dist, gm).values[-1]) / (2 * eps)
            assert analytic_cf_deriv(dist, g).values[-1] == pytest.approx(fd, abs=1e-6)

    def test_normal_closed_form(self):
        g = FreqGrid(1.0, 3)
        assert analytic_cf_deriv(normal(1.0), g).values[-1] == pytest.approx(
            -np.exp(-0.5), abs=1e-12)

    def test_derivative_curves_are_flagged(self):
        g = FreqGrid(1.0, 3)
        assert not analytic_cf_deriv(normal(1.0), g).is_cf


class TestComposeSlices:
    def test_all_normal_marginal(self, all_normal_config):
        g = FreqGrid(3.0, 301)
        sl = compose_phi_Y_slices(all_normal_config, g)
        expect = np.exp(-1.5 * g.values**2)
        assert sup_err(sl.curve_00r, expect) < 1e-14
        assert sup_err(sl.curve_s00, expect) < 1e-14

    def test_derivative_slice_zero_at_origin(self, all_normal_config):
        g = FreqGrid(3.0, 301)
        sl = compose_phi_Y_slices(all_normal_config, g)
        assert sl.dcurve_00r.value_at_zero() == 0.0
        assert sl.dcurve_0t0.value_at_zero() == 0.0

    def test_uniform_alpha_slice_values_at_pi(self):
        cfg = ModelConfig(0.0, uniform(1.0), normal(1.0), normal(1.0))
        g = FreqGrid(np.pi, 5)
        sl = compose_phi_Y_slices(cfg, g)
        assert abs(sl.curve_00r.values[-1]) < 1e-15
        # phi_eta(pi)*phi_eps(pi)*phi_alpha'(pi) = exp(-pi^2) * (-1/pi)
        expect = -np.exp(-np.pi**2) / np.pi
        assert sl.dcurve_00r.values[-1] == pytest.approx(expect, rel=1e-12)

    def test_eta_slice_uses_eta_derivative(self):
        cfg = ModelConfig(0.0, normal(1.0), two_point(1.0), normal(1.0))
        g = FreqGrid(2.0, 401)
        sl = compose_phi_Y_slices(cfg, g)
        t = g.values
        expect = np.exp(-t**2) * (-np.sin(t))
        assert np.max(np.abs(sl.dcurve_0t0.values - expect)) < 1e-14

    def test_degenerate_component_is_identity_factor(self):
        cfg = ModelConfig(0.0, ComponentDist.degenerate(), normal(1.0), normal(1.0))
        g = FreqGrid(2.0, 101)
        sl = compose_phi_Y_slices(cfg, g)
        assert sup_err(sl.curve_00r, np.exp(-g.values**2)) < 1e-14
        assert np.all(sl.dcurve_00r.values == 0.0)  # alpha' = 0


class TestAnalyticDensity:
    def test_two_point_has_no_density(self):
        with pytest.raises(ValueError):
            analytic_density(two_point(1.0), np.array([0.0]))

    @pytest.mark.parametrize("dist", [normal(1.0), laplace(1.0), uniform(1.0),
                                      shifted_exp(2.0)], ids=lambda d: d.kind)
    def test_integrates_to_one(self, dist):
        x = np.linspace(-30, 30, 240_001)
        assert np.trapezoid(analytic_density(dist, x), x) == pytest.approx(1.0, abs=1e-3)


def test_ecf_converges_at_sqrt_n_rate():
    # sup error on |s|<=3 drops roughly sqrt(10)-fold when n grows 10x
    g = FreqGrid.from_spacing(3.0, 0.02)
    truth = np.exp(-g.values**2 / 2)
    gens = component_generators(1234)
    x = draw(normal(1.0), gens["alpha_i"], 1_000_000)
    e_small = sup_err(ecf(x[:100_000], g), truth)
    e_large = sup_err(ecf(x, g), truth)
    assert 1.8 <= e_small / e_large <= 5.5
