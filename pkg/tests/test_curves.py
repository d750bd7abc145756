import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fptlab.curves import (TransformParams, affine, compose_params, constant, curve_from_spec,
                           from_callable, horizon_info, normalize_sign, pi, power_law, quadratic,
                           rho_tau, s_transform, shifted_quadratic, sigma, tabulated, tau)
from fptlab.errors import DomainError, ParameterError, SpecError

alphas = st.floats(0.3, 3.0)
betas = st.floats(-0.5, 1.0)


def sine_curve():
    return from_callable(lambda t: 1 + 0.5 * np.sin(t), derivative=lambda t: 0.5 * np.cos(t))


class TestTransformParams:
    def test_rejects_zero_alpha(self):
        with pytest.raises(ParameterError):
            TransformParams(0.0, 1.0)

    @pytest.mark.parametrize("al,be,zeta", [(1, 1, math.inf), (2, 0, math.inf), (1.5, -0.2, 1 / 0.3)])
    def test_zeta(self, al, be, zeta):
        assert TransformParams(al, be).zeta == pytest.approx(zeta)

    def test_time_map_roundtrip(self):
        p = TransformParams(1.5, 0.4)
        t = np.linspace(0, 5, 11)
        np.testing.assert_allclose(p.inverse_time_map(p.time_map(t)), t, atol=1e-13)

    def test_compose_with_identity(self):
        p = TransformParams(1.7, -0.3)
        assert compose_params(p, TransformParams(1, 0)) == p
        assert compose_params(TransformParams(1, 0), p) == p

    def test_normalize_sign(self):
        p, flipped = normalize_sign(TransformParams(-2.0, 0.5))
        assert (p.alpha, p.beta, flipped) == (2.0, -0.5, True)
        f = affine(1.0, 0.3)
        t = np.linspace(0, 0.9, 9)
        np.testing.assert_allclose(s_transform(TransformParams(-2.0, 0.5), f)(t),
                                   -s_transform(p, f)(t), rtol=1e-15)


class TestFamilies:
    @pytest.mark.parametrize("a0,b0", [(1, 0), (1, 1), (2, -0.3), (-1, 0.5)])
    @pytest.mark.parametrize("al,be", [(1, 1), (2, 0.5), (1.5, -0.2)])
    def test_affine_closure(self, a0, b0, al, be):
        img = s_transform(TransformParams(al, be), affine(a0, b0))
        t = np.linspace(0, min(img.horizon, 5.0) * 0.99, 21)
        np.testing.assert_allclose(img(t), a0 / al + (a0 * be + b0 * al) * t, rtol=1e-13, atol=1e-14)

    def test_affine_horizon_and_clock(self):
        f = affine(2.0, -0.5)
        assert f.horizon == 4.0
        t = np.array([0.5, 1.0, 3.0])
        np.testing.assert_allclose(tau(f, t), t / (2 * (2 - 0.5 * t)), rtol=1e-14)

    def test_affine_rejects_zero_start(self):
        with pytest.raises(ParameterError):
            affine(0.0, 1.0)

    def test_quadratic_clock_matches_quadrature(self):
        f = quadratic(1.3)
        t = np.array([0.2, 1.0, 4.0])
        np.testing.assert_allclose(tau(f, t), tau(f.generic(), t), rtol=1e-12)
        assert f.tau_total == pytest.approx(math.pi / (4 * 1.3))

    def test_power_law_values(self):
        f = power_law(3.0, 1 / 3)
        np.testing.assert_allclose(f([0.0, 1.0, 7 / 3]), [1.0, 4 ** (1 / 3), 2.0], rtol=1e-14)

    def test_shifted_quadratic(self):
        f = shifted_quadratic(1.0)
        assert f(2.0) == pytest.approx(9.0)
        assert f.kind == "shifted_quadratic"

    def test_domain_error_outside_horizon(self):
        with pytest.raises(DomainError):
            affine(1.0, -1.0)(1.5)
        with pytest.raises(DomainError):
            constant(1.0)(-0.1)

    def test_tabulated_reproduces_line(self):
        t = np.linspace(0, 2, 9)
        f = tabulated(t, 1 + 0.5 * t)
        x = np.linspace(0, 1.9, 13)
        np.testing.assert_allclose(f(x), 1 + 0.5 * x, rtol=1e-14)
        np.testing.assert_allclose(f.derivative(x), 0.5, rtol=1e-12)

    @pytest.mark.parametrize("t,f,err", [([0, 1], [1], SpecError), ([0.5, 1], [1, 2], SpecError),
                                         ([0, 1], [1, -1], DomainError)])
    def test_tabulated_rejects(self, t, f, err):
        with pytest.raises(err):
            tabulated(np.array(t, dtype=float), np.array(f, dtype=float))

    def test_fd_derivative_fallback(self):
        f = from_callable(lambda t: np.exp(-t) + t**2)
        t = np.array([0.0, 0.5, 2.0])
        np.testing.assert_allclose(f.derivative(t), -np.exp(-t) + 2 * t, atol=1e-9)
        np.testing.assert_allclose(f.second_derivative(t), np.exp(-t) + 2, atol=1e-6)


class TestOperators:
    @pytest.mark.parametrize("make", [sine_curve, lambda: quadratic(1.0).generic(),
                                      lambda: power_law(3.0, 1 / 3).generic(), lambda: affine(1, 0.5)])
    def test_sigma_involution(self, make):
        c = make()
        ss = sigma(sigma(c))
        t = np.linspace(0, min(4.0, 0.9 * ss.horizon), 21)
        np.testing.assert_allclose(ss(t), c(t), rtol=1e-8)

    def test_sigma_of_power_law(self):
        # (3t+1)^{1/3} is exchanged with the decreasing solution 1/(1+t)
        s = sigma(power_law(3.0, 1 / 3))
        t = np.linspace(0, 5, 11)
        np.testing.assert_allclose(s(t), 1 / (1 + t), rtol=1e-12)

    def test_sigma_swaps_domain(self):
        f = quadratic(1.0)
        s = sigma(f)
        assert s.horizon == pytest.approx(f.tau_total)

    def test_pi_formula(self):
        phi = sine_curve()
        p = TransformParams(1.5, 0.3)
        t = np.linspace(0, 3, 13)
        np.testing.assert_allclose(pi(p, phi)(t), phi(t) * (1.5 + 0.3 * tau(phi, t)), rtol=1e-12)

    def test_pi_composition(self):
        phi = sine_curve()
        a, b = TransformParams(1.5, 0.3), TransformParams(0.8, 0.4)
        flat = TransformParams(a.alpha * b.alpha, a.alpha * b.beta + a.beta / b.alpha)
        t = np.linspace(0, 3, 13)
        np.testing.assert_allclose(pi(a, pi(b, phi))(t), pi(flat, phi)(t), rtol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(alphas, betas)
    def test_s_equals_sigma_pi_sigma(self, al, be):
        c = quadratic(1.0)
        p = TransformParams(al, be)
        direct = s_transform(p, c)
        piped = sigma(pi(TransformParams(al, -be), sigma(c)))
        top = min(direct.horizon, piped.horizon, 3.0)
        t = np.linspace(0, 0.95 * top, 15)
        np.testing.assert_allclose(direct(t), piped(t), rtol=1e-8)

    @pytest.mark.parametrize("be", [5e-324, 2.2e-309, 1e-300])
    def test_pipeline_with_tiny_beta(self, be):
        # -α/β overflows; the Π image must still be truncated where α + βτ vanishes
        c = quadratic(1.0)
        piped = sigma(pi(TransformParams(1.0, -be), sigma(c)))
        t = np.linspace(0, 3.0, 13)
        np.testing.assert_allclose(piped(t), s_transform(TransformParams(1.0, be), c)(t), rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(alphas, betas, alphas, betas)
    def test_composition_law(self, a1, b1, a2, b2):
        p1, p2 = TransformParams(a1, b1), TransformParams(a2, b2)
        c = affine(1.0, 0.5)
        nested = s_transform(p2, s_transform(p1, c))
        flat = s_transform(compose_params(p2, p1), c)
        top = min(nested.horizon, flat.horizon, 4.0)
        assume(top > 1e-3)
        t = np.linspace(0, 0.95 * top, 11)
        np.testing.assert_allclose(nested(t), flat(t), rtol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(alphas, betas)
    def test_tau_change_of_variables(self, al, be):
        p = TransformParams(al, be)
        c = sine_curve()
        img = s_transform(p, c)
        top = min(img.horizon, 3.0)
        t = np.linspace(0.05, 0.95 * top, 9)
        np.testing.assert_allclose(tau(img.generic(), t), tau(c, p.time_map(t)), rtol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.01, 20.0))
    def test_rho_inverts_tau(self, s):
        c = sine_curve()
        assert tau(c, rho_tau(c, s)) == pytest.approx(s, rel=1e-12)

    def test_rho_outside_range(self):
        with pytest.raises(DomainError):
            rho_tau(quadratic(1.0), math.pi)

    def test_horizon_info(self):
        p = TransformParams(1.5, -0.2)
        f = affine(1.0, 0.5)
        dom = horizon_info(p, f.domain(), f)
        assert dom.a == pytest.approx(s_transform(p, f).horizon)
        assert dom.a == pytest.approx(p.zeta)


class TestSpecs:
    @pytest.mark.parametrize("spec,value", [
        ("affine:1,0.5", 1.5), ("constant:2", 2.0), ("quadratic:1", 2.0), ("shifted_quadratic:1", 4.0),
        ("power:3,0.5", 2.0), ('{"kind": "affine", "a0": 1, "b0": 0.5}', 1.5),
        ({"kind": "transformed", "alpha": 1, "beta": 1, "inner": "constant:1"}, 2.0),
    ])
    def test_parse(self, spec, value):
        assert curve_from_spec(spec)(1.0) == pytest.approx(value)

    def test_table_spec(self):
        c = curve_from_spec(json.dumps({"kind": "table", "t": [0, 1, 2], "f": [1, 2, 3]}))
        assert c(1.5) == pytest.approx(2.5)

    @pytest.mark.parametrize("spec", ["bogus:1", "affine:1", "{not json", {"kind": "affine", "a0": 1},
                                      {"a0": 1}, {"kind": "affine", "a0": "x", "b0": 1},
                                      {"kind": "transformed", "alpha": 1, "beta": 0}])
    def test_spec_errors(self, spec):
        with pytest.raises(SpecError):
            curve_from_spec(spec)
