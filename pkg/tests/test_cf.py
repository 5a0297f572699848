import numpy as np
import pytest

from dyadeconv import (
    ComplexCurve,
    FreqGrid,
    ModelConfig,
    PsiCurve,
    analytic_cf,
    analytic_cf_deriv,
    center,
    compose_phi_Y_slices,
    detect_zeros,
    ecf,
    ecf_pair,
    ecf_partial_first,
    psi_from_curves,
    sample_components,
    component_generators,
    draw,
)
from dyadeconv.identify import ZeroSet
from conftest import normal, uniform, sup_err


def direct_ecf(x, s):
    """Independent oracle: the plain average, no recurrence."""
    return np.exp(1j * np.outer(s, x)).mean(axis=1)


def direct_partial(yf, ya, s):
    return (1j * yf * np.exp(1j * np.outer(s, ya))).mean(axis=1)


class TestECF:
    def test_all_zeros_column(self):
        g = FreqGrid(3.0, 61)
        assert np.all(ecf(np.zeros(10), g).values == 1.0)

    def test_two_point_column_is_cosine(self):
        g = FreqGrid(3.0, 61)
        vals = ecf(np.array([-1.0, 1.0]), g).values
        assert np.max(np.abs(vals - np.cos(g.values))) < 1e-12

    def test_empty_column_rejected(self):
        with pytest.raises(ValueError):
            ecf(np.array([]), FreqGrid(1.0, 3))

    def test_matches_direct_average(self):
        g = FreqGrid(2.0, 41)
        x = np.random.default_rng(5).normal(size=300)
        assert np.max(np.abs(ecf(x, g).values - direct_ecf(x, g.values))) < 1e-10

    def test_sup_error_vs_analytic_normal(self):
        g = FreqGrid.from_spacing(3.0, 0.01)
        gens = component_generators(42)
        x = draw(normal(1.0), gens["alpha_i"], 200_000)
        truth = np.exp(-g.values**2 / 2)
        assert sup_err(ecf(x, g), truth) <= 0.02

    def test_scale_equivariance(self):
        # ecf of lam*x on grid s equals ecf of x on grid lam*s
        lam = 2.5
        rng = np.random.default_rng(7)
        x = rng.normal(size=500)
        g1 = FreqGrid(2.0, 81)
        g2 = FreqGrid(lam * 2.0, 81)
        a = ecf(lam * x, g1).values
        b = ecf(x, g2).values
        assert np.max(np.abs(a - b)) < 1e-10

    def test_hermitian_and_anchor_exact(self):
        g = FreqGrid(2.0, 41)
        x = np.random.default_rng(11).normal(size=100)
        v = ecf(x, g).values
        assert v[g.zero_index] == 1.0 + 0.0j
        assert np.array_equal(v[::-1], np.conj(v))


class TestECFPartialFirst:
    def test_zero_weights(self):
        g = FreqGrid(3.0, 61)
        vals = ecf_partial_first(np.zeros(10), np.ones(10), g).values
        assert np.all(vals == 0.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ecf_partial_first(np.ones(3), np.ones(4), FreqGrid(1.0, 3))

    def test_matches_direct_average(self):
        g = FreqGrid(2.0, 41)
        rng = np.random.default_rng(5)
        yf, ya = rng.normal(size=300), rng.normal(size=300)
        got = ecf_partial_first(yf, ya, g).values
        assert np.max(np.abs(got - direct_partial(yf, ya, g.values))) < 1e-10

    def test_is_derivative_of_ecf(self):
        # same column twice: the estimator is the exact s-derivative of the
        # empirical CF; compare with a central difference of the direct ECF
        x = np.random.default_rng(3).normal(size=2000)
        g = FreqGrid(2.0, 41)
        got = ecf_partial_first(x, x, g).values
        d = g.spacing / 2
        fd = (direct_ecf(x, g.values + d) - direct_ecf(x, g.values - d)) / (2 * d)
        # discrepancy is the finite-difference error d^2/6 * ecf'''
        assert np.max(np.abs(got - fd)) < (d**2 / 6) * np.mean(np.abs(x) ** 3) * 1.5

    def test_convergence_order_h2(self):
        # halving the step reduces the discrepancy about 4x
        gens = component_generators(88)
        x = draw(normal(1.0), gens["alpha_i"], 20_000)
        g = FreqGrid.from_spacing(3.0, 0.05)
        exact = ecf_partial_first(x, x, g).values

        def discrepancy(d):
            fd = (direct_ecf(x, g.values + d) - direct_ecf(x, g.values - d)) / (2 * d)
            return np.max(np.abs(exact - fd))

        ratio = discrepancy(0.1) / discrepancy(0.05)
        assert 3.5 <= ratio <= 4.5

    def test_matches_analytic_slice_on_simulated_triples(self, all_normal_config):
        # E[i y_ij e^{i r y_il}] = phi_eta(r) phi_eps(r) phi_alpha'(r)
        samples = sample_components(all_normal_config, 200_000, seed=14)
        g = FreqGrid.from_spacing(3.0, 0.01)
        got = ecf_partial_first(center(samples.y_ij), center(samples.y_il), g)
        truth = compose_phi_Y_slices(all_normal_config, g).dcurve_00r
        assert np.max(np.abs(got.values - truth.values)) <= 0.03

    def test_antihermitian_mirror(self):
        g = FreqGrid(2.0, 41)
        rng = np.random.default_rng(9)
        yf, ya = rng.normal(size=50), rng.normal(size=50)
        v = ecf_partial_first(yf, ya, g).values
        assert np.array_equal(v[::-1], -np.conj(v))


def test_ecf_pair_consistent():
    g = FreqGrid(2.0, 81)
    rng = np.random.default_rng(21)
    yf, ya = rng.normal(size=400), rng.normal(size=400)
    den, num = ecf_pair(yf, ya, g)
    assert np.array_equal(den.values, ecf(ya, g).values)
    assert np.array_equal(num.values, ecf_partial_first(yf, ya, g).values)


class TestPsiCurve:
    def test_masked_values_must_be_zero(self):
        g = FreqGrid(1.0, 5)
        mask = np.array([False, True, False, False, False])
        with pytest.raises(ValueError):
            PsiCurve(g, np.ones(5, complex), mask)

    def test_values_must_be_finite(self):
        g = FreqGrid(1.0, 5)
        vals = np.ones(5, complex)
        vals[2] = np.nan
        with pytest.raises(ValueError):
            PsiCurve(g, vals, np.zeros(5, bool))

    def test_clean_values_interpolates_mask(self):
        g = FreqGrid(2.0, 5)  # spacing 1
        vals = np.array([4.0, 0.0, 0.0, 1.0, 2.0], dtype=complex)
        mask = np.array([False, True, False, False, False])
        psi = PsiCurve(g, vals, mask)
        clean = psi.clean_values()
        assert clean[1] == pytest.approx((4.0 + 0.0) / 2)  # linear between neighbors
        assert np.array_equal(clean[2:], vals[2:])


class TestPsiFromCurves:
    def test_normal_ratio_is_minus_s(self, grid_coarse):
        num = analytic_cf_deriv(normal(1.0), grid_coarse)
        den = analytic_cf(normal(1.0), grid_coarse)
        psi = psi_from_curves(num, den, ZeroSet.empty(grid_coarse.spacing))
        assert np.max(np.abs(psi.values - (-grid_coarse.values))) < 1e-12

    def test_unit_denominator_returns_numerator(self, grid_coarse):
        num = analytic_cf_deriv(normal(1.0), grid_coarse)
        den = ComplexCurve(grid_coarse, np.ones(grid_coarse.n_points))
        psi = psi_from_curves(num, den, ZeroSet.empty(grid_coarse.spacing))
        assert np.array_equal(psi.values, num.values)

    def test_grid_mismatch_rejected(self):
        num = analytic_cf_deriv(normal(1.0), FreqGrid(2.0, 41))
        den = analytic_cf(normal(1.0), FreqGrid(2.0, 43))
        with pytest.raises(ValueError):
            psi_from_curves(num, den, ZeroSet.empty(0.1))

    def test_sinc_divergence_near_masked_zero(self):
        # psi = cot(s) - 1/s blows up towards pi but is 0 at the masked point
        g = FreqGrid.from_spacing(7.0, 0.01)
        den = analytic_cf(uniform(1.0), g)
        num = analytic_cf_deriv(uniform(1.0), g)
        zeros = detect_zeros(den)
        psi = psi_from_curves(num, den, zeros)
        assert np.all(np.isfinite(psi.values.view(np.float64)))
        assert np.all(psi.values[psi.zero_mask] == 0.0)
        i_pi = int(np.argmin(np.abs(g.values - np.pi)))
        near = abs(psi.values[i_pi - 2])
        far = abs(psi.values[i_pi - 50])
        assert near > 10 * far > 0


def test_psi_of_mc_normal_denominator_is_linear():
    # single-column psi: d log ecf; fit on |s|<=2 is close to -s
    gens = component_generators(52)
    x = draw(normal(1.0), gens["alpha_i"], 200_000)
    g = FreqGrid.from_spacing(2.0, 0.01)
    den, num = ecf_pair(x, x, g)
    psi = psi_from_curves(num, den, ZeroSet.empty(g.spacing))
    s = g.values
    slope = np.linalg.lstsq(s[:, None], psi.values.real, rcond=None)[0][0]
    resid = psi.values.real - slope * s
    assert slope == pytest.approx(-1.0, abs=0.02)
    assert np.max(np.abs(resid)) <= 0.05
