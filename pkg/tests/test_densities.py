import math

import numpy as np
import pytest

from fptlab.curves import (TransformParams, affine, compose_params, constant, curve_from_spec,
                           from_callable, quadratic, s_transform, shifted_quadratic)
from fptlab.densities import (FptDensity, affine_density, density_for_curve, drift_shift_density,
                              empirical_density, groeneboom_density, shifted_quadratic_density,
                              transform_density, transformed_shifted_quadratic)
from fptlab.errors import ParameterError, UnsupportedRegimeError
from fptlab.montecarlo import FptSampleSet

PARAMS = [(1, 1), (2, 0.5), (1.5, -0.2)]


class TestAffine:
    def test_reference_value(self):
        assert affine_density(1, 1)(1.0) == pytest.approx(0.0539910, abs=5e-8)

    @pytest.mark.parametrize("a0,b0", [(1, 0), (1, 1), (2, -0.3), (0.5, 2)])
    def test_mass(self, a0, b0):
        d = affine_density(a0, b0)
        expected = min(1.0, math.exp(-2 * a0 * b0))
        assert d.total_mass == pytest.approx(expected, rel=1e-14)
        assert d.cdf(1e6) == pytest.approx(expected, abs=1e-3 if b0 == 0 else 1e-9)

    def test_zero_outside_support(self):
        d = affine_density(1, 0)
        np.testing.assert_array_equal(d([-1.0, 0.0]), [0.0, 0.0])

    def test_cdf_closed_form(self):
        # f ≡ 1: P(T <= t) = 2 Φ(-1/√t)
        from scipy.stats import norm
        t = np.array([0.5, 1.0, 4.0])
        np.testing.assert_allclose(affine_density(1, 0).cdf(t), 2 * norm.cdf(-1 / np.sqrt(t)), rtol=1e-10)

    @pytest.mark.parametrize("a0,b0", [(0, 1), (-1, 1), (1, math.inf)])
    def test_rejects(self, a0, b0):
        with pytest.raises(ParameterError):
            affine_density(a0, b0)


class TestTransform:
    @pytest.mark.parametrize("a0,b0", [(1, 0), (1, 1), (2, -0.3)])
    @pytest.mark.parametrize("al,be", PARAMS)
    def test_affine_exactness(self, a0, b0, al, be):
        p = TransformParams(al, be)
        td = transform_density(p, affine_density(a0, b0), affine(a0, b0))
        ref = affine_density(a0 / al, a0 * be + b0 * al)
        t = np.linspace(0, min(p.zeta, 10.0), 202)[1:-1]
        np.testing.assert_allclose(td(t), ref(t), rtol=1e-10)

    def test_brownian_scaling(self):
        base = groeneboom_density(1.0)
        td = transform_density(TransformParams(2.0, 0.0), base, quadratic(1.0))
        t = np.linspace(0.1, 1.0, 20)
        np.testing.assert_allclose(td(t), 4 * base(4 * t), rtol=1e-13)

    def test_composition(self):
        base, f = affine_density(1.0, 0.2), affine(1.0, 0.2)
        p1, p2 = TransformParams(1.3, 0.4), TransformParams(0.7, -0.1)
        two = transform_density(p2, transform_density(p1, base, f), s_transform(p1, f))
        one = transform_density(compose_params(p2, p1), base, f)
        t = np.linspace(0.01, 8.0, 50)
        np.testing.assert_allclose(two(t), one(t), rtol=1e-10)

    def test_mass_preserved_for_positive_beta(self):
        # S^{α,β} with β > 0 keeps hits of f and adds no new ones: mass e^{-2 a0 b0} maps exactly
        td = transform_density(TransformParams(1.0, 1.0), affine_density(1, 0), constant(1.0))
        assert td.total_mass == pytest.approx(math.exp(-2), rel=1e-9)

    def test_t_min_and_horizon_are_mapped(self):
        p = TransformParams(1.5, -0.2)
        td = transform_density(p, groeneboom_density(1.0), quadratic(1.0))
        assert td.t_min == pytest.approx(p.inverse_time_map(groeneboom_density(1.0).t_min))
        assert td.horizon == pytest.approx(p.zeta)

    def test_requires_positive_alpha(self):
        with pytest.raises(ParameterError):
            transform_density(TransformParams(-1, 0), affine_density(1, 0), constant(1.0))


class TestParabola:
    def test_reference_values(self):
        d = groeneboom_density(1.0)
        assert d(1.0) == pytest.approx(0.0254995, rel=1e-5)
        assert d.t_min == pytest.approx(0.1903, abs=1e-4)

    def test_refuses_small_times(self):
        with pytest.raises(UnsupportedRegimeError, match="Monte Carlo"):
            groeneboom_density(1.0)(0.01)

    @pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
    def test_positive_with_mass_below_one(self, kappa):
        d = groeneboom_density(kappa)
        t = np.linspace(d.t_min, 3.0, 40)
        assert np.all(d(t) > 0)
        assert 0 < d.cdf(3.0) < 1

    def test_girsanov_variant_is_drift_shift(self):
        g = shifted_quadratic_density(1.0, "girsanov")
        ref = drift_shift_density(groeneboom_density(1.0), quadratic(1.0), 2.0)
        t = np.linspace(0.2, 2.0, 19)
        np.testing.assert_allclose(g(t), ref(t), rtol=1e-15)

    @pytest.mark.parametrize("kappa", [0.5, 1.0, 1.5])
    def test_variants_differ_by_cubic_factor(self, kappa):
        a = shifted_quadratic_density(kappa, "h_kappa")
        b = shifted_quadratic_density(kappa, "girsanov")
        t = np.linspace(max(a.t_min, b.t_min), 2.0, 15)
        np.testing.assert_allclose(a(t) / b(t), np.exp(-2 / 3 * kappa**4 * t**3), rtol=1e-10)

    @pytest.mark.parametrize("variant", ["h_kappa", "girsanov"])
    @pytest.mark.parametrize("al,be", [(1.2, 0.3), (1.0, 0.0), (2.0, -0.25)])
    def test_transformed_closed_form(self, variant, al, be):
        p = TransformParams(al, be)
        a = transformed_shifted_quadratic(p, 1.0, variant)
        b = transform_density(p, shifted_quadratic_density(1.0, variant), shifted_quadratic(1.0))
        t = np.linspace(a.t_min * 1.01, min(3.0, 0.95 * a.horizon), 40)
        np.testing.assert_allclose(a(t), b(t), rtol=1e-10)

    def test_unknown_variant(self):
        with pytest.raises(ParameterError):
            shifted_quadratic_density(1.0, "printed")


class TestDriftShift:
    @pytest.mark.parametrize("c", [-0.5, 0.3, 2.0])
    def test_affine_shift(self, c):
        d = drift_shift_density(affine_density(1.0, 0.5), affine(1.0, 0.5), c)
        t = np.linspace(0.05, 5, 30)
        np.testing.assert_allclose(d(t), affine_density(1.0, 0.5 + c)(t), rtol=1e-13)


class TestEmpirical:
    def test_heights_and_mass(self):
        s = FptSampleSet(np.array([0.1, 0.2, 0.25, 0.9]), 6, 10, {"horizon": 1.0})
        d = empirical_density(s, bins=4)
        assert d.total_mass == pytest.approx(0.4)
        np.testing.assert_allclose(d([0.05, 0.3, 0.6, 0.8]), [0.8, 0.4, 0.0, 0.4])
        assert d.cdf(1.0) == pytest.approx(0.4)

    def test_requires_hits(self):
        with pytest.raises(ParameterError):
            empirical_density(FptSampleSet(np.array([]), 5, 5, {"horizon": 1.0}))


class TestDispatch:
    @pytest.mark.parametrize("spec,ref", [
        ("affine:1,1", affine_density(1, 1)), ("affine:-1,-1", affine_density(1, 1)),
        ({"kind": "transformed", "alpha": 1, "beta": 1, "inner": "constant:1"}, affine_density(1, 1)),
        ({"kind": "transformed", "alpha": -1, "beta": -1, "inner": "constant:1"}, affine_density(1, 1)),
        ("quadratic:1", groeneboom_density(1.0)),
    ])
    def test_closed_forms(self, spec, ref):
        d = density_for_curve(curve_from_spec(spec))
        t = np.array([0.5, 1.0, 2.0])
        np.testing.assert_allclose(d(t), ref(t), rtol=1e-13)

    def test_default_variant_is_girsanov(self):
        d = density_for_curve(shifted_quadratic(1.0))
        assert d.provenance[-1] == "girsanov"

    def test_unsupported_curve(self):
        with pytest.raises(UnsupportedRegimeError):
            density_for_curve(from_callable(lambda t: 1 + np.sin(t) / 2))


def test_density_object_is_thread_safe_lazy():
    calls = []

    def f(t):
        calls.append(1)
        return np.exp(-t)

    d = FptDensity(f, math.inf)
    assert d.total_mass == pytest.approx(1.0)
    n = len(calls)
    assert d.total_mass == pytest.approx(1.0)
    assert len(calls) == n
