"""First-passage-time densities of Brownian motion.

Closed forms for straight lines and for the parabola ``1 + κ²t²`` (Airy
series), the Cameron-Martin shift by a linear drift, and the transform that
carries the density for ``f`` to the density for ``S^{α,β} f``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .curves import (Curve, TransformParams, normalize_sign, pi, quadratic, s_transform,
                     shifted_quadratic)
from .errors import DomainError, ParameterError, UnsupportedRegimeError
from .quadrature import cumulative, integrate
from .special import airy_ai, airy_zeros_with_derivatives

N_AIRY_TERMS = 200
SERIES_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FptDensity:
    """Density of a (possibly defective) first passage time.

    ``func`` is only called on ``t_min <= t < horizon`` with ``t > 0``; the
    density is zero for ``t <= 0`` and beyond the horizon. For ``0 < t < t_min``
    the representation is unreliable and evaluation raises.
    """

    func: Callable[[np.ndarray], np.ndarray]
    horizon: float = math.inf
    provenance: tuple = ("callable",)
    breakpoints: tuple = ()
    t_min: float = 0.0
    mass: Optional[float] = None
    log_func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: Any = field(default_factory=threading.Lock, repr=False)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        out = self._eval(arr.ravel()).reshape(arr.shape)
        return float(out) if arr.ndim == 0 else out

    def _eval(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(t)
        inside = (t > 0) & (t < self.horizon)
        if np.any(inside & (t < self.t_min)):
            raise UnsupportedRegimeError(
                f"density representation unreliable below t_min={self.t_min:.4g}; "
                "use Monte Carlo (simulate) or the PDE solver there")
        if np.any(inside):
            out[inside] = np.asarray(self.func(t[inside]), dtype=float)
        return out

    @property
    def kind(self) -> str:
        return self.provenance[0]

    @property
    def total_mass(self) -> float:
        """``∫ p`` over ``[t_min, horizon)``; a lower bound when ``t_min > 0``."""
        with self._lock:
            if "mass" not in self._cache:
                if self.mass is not None:
                    self._cache["mass"] = float(self.mass)
                else:
                    val, _ = integrate(self._eval, self.t_min, self.horizon, self.breakpoints)
                    self._cache["mass"] = val
            return self._cache["mass"]

    def cdf(self, t):
        """``∫_{t_min}^t p``."""
        arr = np.asarray(t, dtype=float)
        flat = np.clip(arr.ravel(), self.t_min, self.horizon)
        if np.any(np.isinf(flat)):
            raise DomainError("cdf argument must be finite")
        span = float(flat.max()) - self.t_min if flat.size else 0.0
        pts = tuple(self.breakpoints)
        if span > 1e-2:
            # geometric breakpoints keep a narrow peak from hiding inside one wide panel
            k = int(np.ceil(4 * np.log10(span / 1e-3))) + 1
            pts += tuple(self.t_min + np.geomspace(1e-3, span, k)[:-1])
        out = cumulative(self._eval, flat, self.t_min, pts)
        out = out.reshape(arr.shape)
        return float(out) if arr.ndim == 0 else out


def _gauss_fpt(a0, b0, t):
    return a0 / np.sqrt(2 * np.pi * t**3) * np.exp(-((a0 + b0 * t) ** 2) / (2 * t))


def _log_gauss_fpt(a0, b0, t):
    return math.log(a0) - 0.5 * np.log(2 * np.pi * t**3) - (a0 + b0 * t) ** 2 / (2 * t)


def affine_density(a0: float, b0: float) -> FptDensity:
    """Density of the first hitting of ``a0 + b0 t`` (inverse Gaussian type)."""
    if not a0 > 0 or not math.isfinite(a0) or not math.isfinite(b0):
        raise ParameterError("affine density needs a0 > 0 and finite b0")
    return FptDensity(lambda t: _gauss_fpt(a0, b0, t), math.inf, ("affine", a0, b0),
                      mass=min(1.0, math.exp(-2 * a0 * b0)),
                      log_func=lambda t: _log_gauss_fpt(a0, b0, t))


def transform_density(params: TransformParams, base: FptDensity, base_curve: Curve) -> FptDensity:
    """Density of the first passage through ``S^{α,β} f`` from that of ``f``.

    ``p̃(t) = α²(1+αβt)^{-3/2} exp(-αβ (S f(t))² / (2(1+αβt))) p(α²t/(1+αβt))``.
    """
    if params.alpha <= 0:
        raise ParameterError("transform_density needs alpha > 0 (apply normalize_sign first)")
    al, be = params.alpha, params.beta
    image = s_transform(params, base_curve)
    horizon = min(params.zeta, _mapped_horizon(params, base.horizon))
    if base_curve.kind != "affine":
        # a line keeps its formula (and its density) after crossing zero; other
        # curves are only known on their stated domain
        horizon = min(horizon, image.horizon)

    def log_weight(t):
        w = 1.0 + al * be * t
        sf = image.func(t)
        return 2.0 * math.log(al) - 1.5 * np.log(w) - al * be * sf * sf / (2.0 * w)

    log_func = None
    if base.log_func is not None:
        # log space avoids inf * 0 near ζ, where the weight overflows and p underflows
        def log_func(t):
            return log_weight(t) + base.log_func(params.time_map(t))

        def func(t):
            return np.exp(log_func(t))
    else:
        def func(t):
            with np.errstate(over="ignore", invalid="ignore"):
                out = np.exp(log_weight(t)) * base(params.time_map(t))
            return np.where(np.isnan(out), 0.0, out)

    t_min = float(params.inverse_time_map(base.t_min)) if base.t_min > 0 else 0.0
    bps = tuple(float(params.inverse_time_map(x)) for x in base.breakpoints
                if al * al - al * be * x > 0 and float(params.inverse_time_map(x)) < horizon)
    return FptDensity(func, horizon, ("transformed", (al, be), base.provenance), bps, t_min,
                      log_func=log_func)


def _mapped_horizon(p: TransformParams, h: float) -> float:
    if math.isinf(h):
        return math.inf
    d = p.alpha**2 - p.alpha * p.beta * h
    return h / d if d > 0 else math.inf


def drift_shift_density(base: FptDensity, base_curve: Curve, c: float) -> FptDensity:
    """Density for the boundary ``f(t) + c t`` (Cameron-Martin shift)."""
    if not math.isfinite(c):
        raise ParameterError("drift must be finite")
    horizon = min(base.horizon, base_curve.horizon)

    def func(t):
        return np.exp(-c * base_curve.func(t) - 0.5 * c * c * t) * base(t)

    return FptDensity(func, horizon, ("drift_shifted", c, base.provenance), base.breakpoints,
                      base.t_min)


# parabola -------------------------------------------------------------------

@dataclass(frozen=True)
class _AiryParabola:
    """Shared pieces of the Airy series for the parabola ``1 + κ²t²``."""

    kappa: float
    lam: float
    rate: float
    coef: np.ndarray
    zeros: np.ndarray
    t_min: float

    def series(self, t: np.ndarray) -> np.ndarray:
        return np.exp(self.rate * np.outer(t, self.zeros)) @ self.coef

    @property
    def prefactor(self) -> float:
        return 0.5 * self.lam * self.lam


def _airy_parabola(kappa: float) -> _AiryParabola:
    if not kappa > 0 or not math.isfinite(kappa):
        raise ParameterError("kappa must be positive and finite")
    zeros, ders = airy_zeros_with_derivatives(N_AIRY_TERMS)
    lam = (4.0 * kappa * kappa) ** (1.0 / 3.0)
    coef = np.asarray(airy_ai(zeros + lam)) / ders
    rate = 0.5 * lam * lam
    # below t_min the 200th term exceeds SERIES_TOL of its own coefficient
    t_min = math.log(1.0 / SERIES_TOL) / (rate * abs(zeros[-1]))
    return _AiryParabola(kappa, lam, rate, coef, zeros, t_min)


def groeneboom_density(kappa: float) -> FptDensity:
    """Density of the first hitting of ``1 + κ²t²`` (Airy-zero series)."""
    ap = _airy_parabola(kappa)
    k4 = kappa**4

    def func(t):
        return ap.prefactor * np.exp(-2.0 / 3.0 * k4 * t**3) * ap.series(t)

    return FptDensity(func, math.inf, ("groeneboom", kappa), t_min=ap.t_min)


def _h_kappa(kappa: float, t):
    return np.exp(-2 * kappa**2 * t * (1 + 2.0 / 3.0 * kappa**2 * t**2 + kappa * t))


def shifted_quadratic_density(kappa: float, variant: str = "h_kappa") -> FptDensity:
    """Density for the boundary ``(1 + κt)²``.

    ``variant="h_kappa"`` is the closed form
    ``(λ²/2) e^{-2κ} h_κ(t) Σ_k ...`` with ``-log h_κ(t) = 2κ²t(1 + (2/3)κ²t² + κt)``,
    whose cubic exponent is ``-(4/3)κ⁴t³``. ``variant="girsanov"`` is the drift
    shift of :func:`groeneboom_density` by ``c = 2κ``, with cubic exponent
    ``-(2/3)κ⁴t³``. Simulation supports the latter.
    """
    if variant == "girsanov":
        d = drift_shift_density(groeneboom_density(kappa), quadratic(kappa), 2.0 * kappa)
        return FptDensity(d.func, d.horizon, ("shifted_quadratic", kappa, "girsanov"),
                          t_min=d.t_min)
    if variant != "h_kappa":
        raise ParameterError(f"unknown variant {variant!r}")
    ap = _airy_parabola(kappa)
    pref = ap.prefactor * math.exp(-2.0 * kappa)

    def func(t):
        return pref * _h_kappa(kappa, t) * ap.series(t)

    return FptDensity(func, math.inf, ("shifted_quadratic", kappa, "h_kappa"), t_min=ap.t_min)


def transformed_shifted_quadratic(params: TransformParams, kappa: float,
                                  variant: str = "h_kappa") -> FptDensity:
    """Closed form of the density for ``S^{α,β}(1 + κt)²``.

    Written out directly (not through :func:`transform_density`) so that the
    two routes can be checked against each other.
    """
    if params.alpha <= 0:
        raise ParameterError("alpha must be positive")
    if variant == "girsanov":
        base = shifted_quadratic_density(kappa, "girsanov")
        d = transform_density(params, base, shifted_quadratic(kappa))
        return FptDensity(d.func, d.horizon, ("transformed", (params.alpha, params.beta),
                                              base.provenance), t_min=d.t_min)
    if variant != "h_kappa":
        raise ParameterError(f"unknown variant {variant!r}")
    al, be = params.alpha, params.beta
    ap = _airy_parabola(kappa)
    pref = al * al * ap.prefactor * math.exp(-2.0 * kappa)
    horizon = params.zeta

    def func(t):
        w = 1.0 + al * be * t
        u = al * al * t / w
        expo = -be * ((kappa * al * al + al * be) * t + 1.0) ** 4 / (2.0 * al * w**3)
        with np.errstate(over="ignore", invalid="ignore"):
            out = pref * w**-1.5 * np.exp(expo) * _h_kappa(kappa, u) * ap.series(u)
        # near ζ the cubic decay of the series wins over the growing weight
        return np.where(np.isnan(out), 0.0, out)

    t_min = float(params.inverse_time_map(ap.t_min))
    return FptDensity(func, horizon,
                      ("transformed", (al, be), ("shifted_quadratic", kappa, "h_kappa")),
                      t_min=t_min)


# empirical ------------------------------------------------------------------

def empirical_density(samples, bins: int | np.ndarray = 100,
                      upper: Optional[float] = None) -> FptDensity:
    """Histogram density of simulated hitting times.

    Heights are ``count / (n_total * width)`` so the total mass is the hit
    fraction; censored paths carry the missing mass.
    """
    hits = np.asarray(samples.hit_times, dtype=float)
    if samples.n_total == 0 or hits.size == 0:
        raise ParameterError("empirical density needs at least one hitting time")
    top = float(samples.config.get("horizon", hits.max())) if upper is None else float(upper)
    if np.ndim(bins) == 0:
        edges = np.linspace(0.0, top, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    counts, _ = np.histogram(hits, bins=edges)
    heights = counts / (samples.n_total * np.diff(edges))
    lo, hi = float(edges[0]), float(edges[-1])

    def func(t):
        idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, heights.size - 1)
        return np.where((t >= lo) & (t <= hi), heights[idx], 0.0)

    mass = float(np.sum(counts)) / samples.n_total
    return FptDensity(func, hi * (1 + 1e-12), ("empirical", samples.n_total),
                      tuple(edges[1:-1]), mass=mass)


# dispatch -------------------------------------------------------------------

def density_for_curve(curve: Curve, variant: str = "girsanov") -> FptDensity:
    """Closed-form density for curves built from the named families.

    Handles affine and constant lines, the parabola ``1 + κ²t²``, the
    shifted parabola ``(1 + κt)²`` and any chain of S-transforms of those.
    A negative curve has the density of its mirror image.
    """
    if curve.kind == "affine":
        a0, b0 = curve.params
        return affine_density(a0, b0) if a0 > 0 else affine_density(-a0, -b0)
    if curve.kind == "quadratic":
        return groeneboom_density(curve.params[0])
    if curve.kind == "shifted_quadratic":
        return shifted_quadratic_density(curve.params[0], variant)
    if curve.kind == "s_image":
        p, _ = normalize_sign(TransformParams(*curve.params))
        inner = curve.inner
        return transform_density(p, density_for_curve(inner, variant), _positive(inner))
    raise UnsupportedRegimeError(
        f"no closed-form density for curve kind {curve.kind!r}; use Monte Carlo (simulate) "
        "or the PDE solver")


def _positive(c: Curve) -> Curve:
    return c if c.sign > 0 else pi(TransformParams(-1.0, 0.0), c)
