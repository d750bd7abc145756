import math

import numpy as np
import pytest

from fptlab.curves import TransformParams, affine, constant, from_callable, pi, tau
from fptlab.errors import DomainError, ParameterError
from fptlab.gauss_markov import (GaussMarkovSpec, HFactor, h_factor_eval, ht_density_relation_check,
                                 martingale_check, sample_gm, simulate_gm, time_change_fpt)
from fptlab.montecarlo import ks_distance, simulate_fpt


def ou(lam=0.5):
    return from_callable(lambda t: np.exp(-lam * t), derivative=lambda t: -lam * np.exp(-lam * t))


class TestSpec:
    def test_requires_unit_start(self):
        with pytest.raises(ParameterError):
            GaussMarkovSpec(constant(2.0))

    def test_requires_positive(self):
        with pytest.raises(ParameterError):
            GaussMarkovSpec(affine(-1.0, 0.0))

    def test_from_curve_normalises(self):
        spec = GaussMarkovSpec.from_curve(affine(2.0, 1.0))
        assert spec.phi(0.0) == pytest.approx(1.0)
        assert spec.phi(1.0) == pytest.approx(1.5)

    def test_covariance_formula(self):
        spec = GaussMarkovSpec(ou())
        expected = math.exp(-0.75) * (math.exp(0.5) - 1)
        assert spec.covariance(0.5, 1.0) == pytest.approx(expected, rel=1e-10)
        assert spec.covariance(1.0, 0.5) == pytest.approx(expected, rel=1e-10)

    def test_mean(self):
        assert GaussMarkovSpec(ou(), x0=2.0).mean(1.0) == pytest.approx(2 * math.exp(-0.5))


class TestSampling:
    @pytest.mark.parametrize("phi,target", [(constant(1.0), 1.0), (ou(), 1 - math.exp(-1.0))])
    def test_marginal_variance(self, phi, target):
        n = 40000
        x = sample_gm(GaussMarkovSpec(phi), [1.0], n, seed=3)[:, 0]
        se = math.sqrt(2 / (n - 1)) * target
        assert abs(x.var(ddof=1) - target) < 4 * se

    def test_deterministic(self):
        spec = GaussMarkovSpec(ou(), 0.3)
        np.testing.assert_array_equal(sample_gm(spec, [0.2, 0.7], 100, 1),
                                      sample_gm(spec, [0.2, 0.7], 100, 1))

    def test_paths_start_at_x0(self):
        paths = simulate_gm(GaussMarkovSpec(ou(), 0.4), 10, 0.01, 1.0, seed=0)
        assert paths.shape == (10, 101)
        np.testing.assert_array_equal(paths[:, 0], 0.4)

    @pytest.mark.parametrize("times", [[0.5, 0.2], [-0.1]])
    def test_bad_times(self, times):
        with pytest.raises(ParameterError):
            sample_gm(GaussMarkovSpec(constant(1.0)), times, 10, 0)

    def test_beyond_domain(self):
        with pytest.raises(DomainError):
            sample_gm(GaussMarkovSpec(affine(1.0, -1.0)), [1.5], 10, 0)

    def test_level_equal_to_start(self):
        with pytest.raises(ParameterError):
            simulate_gm(GaussMarkovSpec(constant(1.0), 1.0), 10, 0.01, 1.0, 0, level=1.0)


class TestHFactor:
    def test_beta_zero_is_constant(self):
        h = HFactor(TransformParams(2.0, 0.0), ou())
        np.testing.assert_allclose(h_factor_eval(h, [0.3, 1.0], [0.5, -2.0]), 1.0)

    def test_brownian_closed_form(self):
        h = HFactor(TransformParams(1.0, -1.0), constant(1.0))
        t, x = 0.4, 0.7
        expected = math.sqrt(1 / (1 - t)) * math.exp(-x * x / (2 * (1 - t)))
        assert h_factor_eval(h, t, x) == pytest.approx(expected, rel=1e-12)

    def test_window_end(self):
        assert HFactor(TransformParams(1.0, -1.0), constant(1.0)).window_end() == pytest.approx(1.0)
        assert HFactor(TransformParams(1.0, 1.0), constant(1.0)).window_end() == math.inf

    def test_outside_window(self):
        with pytest.raises(DomainError):
            h_factor_eval(HFactor(TransformParams(1.0, -1.0), constant(1.0)), 1.2, 0.0)


class TestMartingale:
    @pytest.mark.parametrize("phi,p,x0,t", [
        (constant(1.0), TransformParams(1, -1), 0.0, 0.5),
        (constant(1.0), TransformParams(2, 0), 0.5, 1.0),
        (from_callable(lambda t: np.exp(-t), derivative=lambda t: -np.exp(-t)),
         TransformParams(2, 1), 0.3, 0.4),
    ])
    def test_expectation_preserved(self, phi, p, x0, t):
        res = martingale_check(HFactor(p, phi), GaussMarkovSpec(phi, x0), t, 50000, seed=12)
        assert res.passed, res

    def test_infinite_variance_rejected(self):
        with pytest.raises(DomainError, match="infinite variance"):
            martingale_check(HFactor(TransformParams(1, 1), constant(1.0)),
                             GaussMarkovSpec(constant(1.0)), 1.5, 100, 0)

    def test_outside_window_rejected(self):
        with pytest.raises(DomainError):
            martingale_check(HFactor(TransformParams(1, -1), constant(1.0)),
                             GaussMarkovSpec(constant(1.0)), 1.5, 100, 0)


class TestTimeChange:
    @pytest.mark.parametrize("curve", [constant(1.0), affine(1.0, 0.5)])
    def test_matches_direct_simulation(self, curve):
        n = 20000
        a = time_change_fpt(curve, n, 1e-3, seed=1, horizon=2.0)
        b = simulate_fpt(curve, n, 1e-3, 2.0, seed=2)
        assert ks_distance(a, b, (0.0, 2.0)) < 1.95 * math.sqrt(2 / n)

    def test_negative_curve_mirrors(self):
        f = affine(1.0, 0.5)
        a = time_change_fpt(f, 500, 1e-2, seed=1, horizon=2.0)
        b = time_change_fpt(pi(TransformParams(-1.0, 0.0), f), 500, 1e-2, seed=1, horizon=2.0)
        np.testing.assert_array_equal(a.hit_times, b.hit_times)

    def test_horizon_is_mapped(self):
        s = time_change_fpt(affine(1.0, 1.0), 200, 1e-3, seed=0, horizon=3.0)
        assert s.config["phi_horizon"] == pytest.approx(float(tau(affine(1.0, 1.0), 3.0)))
        assert np.all(s.hit_times <= 3.0 * (1 + 1e-9))

    def test_bad_horizon(self):
        with pytest.raises(DomainError):
            time_change_fpt(affine(1.0, -1.0), 10, 1e-2, seed=0, horizon=2.0)


class TestHtRelation:
    def test_beta_zero_identical(self):
        rep = ht_density_relation_check(TransformParams(1, 0), constant(1.0), 1.0, 0.0, 5000,
                                        seed=0, dt=1e-2, horizon=3.0)
        assert rep.passed, rep.max_z

    def test_brownian_tilt(self):
        rep = ht_density_relation_check(TransformParams(1, 0.5), constant(1.0), 1.0, 0.0, 30000,
                                        seed=4, dt=1e-2, horizon=3.0)
        assert rep.passed, rep.max_z

    def test_horizon_outside_window(self):
        with pytest.raises(DomainError):
            ht_density_relation_check(TransformParams(1, -1), constant(1.0), 1.0, 0.0, 100,
                                      seed=0, horizon=2.0)
