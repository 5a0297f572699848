import numpy as np
import pytest

from dyadeconv import (
    ComponentDist,
    ModelConfig,
    component_generators,
    draw,
    read_samples,
    sample_components,
    write_samples,
)
from conftest import laplace, normal, shifted_exp, two_point, uniform


def rng(seed=0):
    return np.random.default_rng(seed)


class TestDraw:
    def test_two_point_support(self):
        x = draw(two_point(1.0), rng(1), 10_000)
        assert set(np.unique(x)) == {-1.0, 1.0}

    def test_uniform_mean(self):
        # CLT bound 5/sqrt(12*1e6) ~ 0.0014; spec asks 0.005
        x = draw(uniform(1.0), rng(2), 1_000_000)
        assert abs(x.mean()) < 0.005
        assert x.min() >= -1.0 and x.max() <= 1.0

    def test_shifted_exponential_mean_and_support(self):
        x = draw(shifted_exp(2.0), rng(3), 1_000_000)
        assert abs(x.mean()) < 0.01
        assert x.min() > -2.0

    def test_scalar_draw(self):
        assert isinstance(draw(normal(), rng(4)), float)

    def test_degenerate_draws_zero(self):
        x = draw(ComponentDist.degenerate(), rng(5), 100)
        assert np.all(x == 0.0)

    @pytest.mark.parametrize("dist", [normal(1.3), laplace(0.7), uniform(2.0),
                                      two_point(1.5), shifted_exp(1.1)],
                             ids=lambda d: d.kind)
    def test_variance_matches_law(self, dist):
        x = draw(dist, rng(6), 400_000)
        assert x.var(ddof=1) == pytest.approx(dist.variance, rel=0.02)


class TestSampleComponents:
    def test_rejects_n_zero(self, all_normal_config):
        with pytest.raises(ValueError, match="n"):
            sample_components(all_normal_config, 0, seed=1)

    def test_degenerate_hook_gives_constant_triples(self):
        deg = ComponentDist.degenerate()
        cfg = ModelConfig(5.0, deg, deg, deg)
        ss = sample_components(cfg, 10, seed=0)
        assert np.all(ss.data == 5.0)

    def test_variance_of_y(self, all_normal_config):
        # var(y_ij) = var(alpha) + var(eta) + var(eps) = 3
        ss = sample_components(all_normal_config, 100_000, seed=21)
        assert ss.y_ij.var(ddof=1) == pytest.approx(3.0, rel=0.05)

    def test_shared_eta_covariance(self, all_normal_config):
        # cov(y_ij, y_kj) = var(eta) = 1, jointly normal SE = sqrt((9+1)/n)
        ss = sample_components(all_normal_config, 100_000, seed=21)
        cov = np.cov(ss.y_ij, ss.y_kj)[0, 1]
        se = np.sqrt(10.0 / len(ss))
        assert abs(cov - 1.0) <= 5 * se

    def test_cross_covariance_structure(self, all_normal_config):
        ss = sample_components(all_normal_config, 200_000, seed=33)
        n = len(ss)
        se_shared = np.sqrt(10.0 / n)   # var 3*3 + cov^2 1
        se_none = np.sqrt(9.0 / n)
        assert abs(np.cov(ss.y_ij, ss.y_il)[0, 1] - 1.0) <= 5 * se_shared  # alpha
        assert abs(np.cov(ss.y_ij, ss.y_kj)[0, 1] - 1.0) <= 5 * se_shared  # eta
        assert abs(np.cov(ss.y_kj, ss.y_il)[0, 1]) <= 5 * se_none          # none

    def test_determinism_bit_identical(self, all_normal_config):
        a = sample_components(all_normal_config, 1000, seed=5)
        b = sample_components(all_normal_config, 1000, seed=5)
        assert np.array_equal(a.data, b.data)
        c = sample_components(all_normal_config, 1000, seed=6)
        assert not np.array_equal(a.data, c.data)

    def test_substream_isolation(self):
        # draws of one component are unaffected by draws from the others
        g1 = component_generators(17)
        ref = draw(normal(), g1["alpha_i"], 64)
        g2 = component_generators(17)
        draw(laplace(), g2["eps_ij"], 9999)   # exercise another stream first
        draw(uniform(), g2["eta_j"], 1234)
        assert np.array_equal(draw(normal(), g2["alpha_i"], 64), ref)

    def test_component_order_is_documented(self):
        from dyadeconv.simulate import COMPONENTS

        assert COMPONENTS == ("alpha_i", "alpha_k", "eta_j", "eta_l",
                              "eps_ij", "eps_kj", "eps_il")


class TestSamplesIO:
    def test_roundtrip_with_sidecar(self, tmp_path, all_normal_config):
        ss = sample_components(all_normal_config, 50, seed=9)
        path = tmp_path / "samples.csv"
        sidecar = write_samples(ss, path)
        assert sidecar.exists()
        back = read_samples(path)
        assert np.array_equal(back.data, ss.data)
        assert back.seed == 9
        assert back.config == all_normal_config

    def test_read_reports_bad_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y_ij,y_kj,y_il\n1.0,2.0\n")
        with pytest.raises(ValueError, match="line 2"):
            read_samples(path)
