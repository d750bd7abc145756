"""Boundary curves and the transformations acting on them.

A :class:`Curve` is a non-vanishing function on ``[0, horizon)``. The module
provides the clock ``tau f(t) = ∫_0^t f^-2``, its inverse, and the three
operators

* ``sigma``: ``Σf = 1/f ∘ (τf)^{-1}`` (an involution),
* ``pi``: ``Π^{α,β} f = f (α + β τf)``,
* ``s_transform``: ``S^{α,β} f(t) = (1+αβt)/α · f(α²t/(1+αβt))``,

together with closed-form clocks for the standard families. Operators keep
track of the transformed horizon and clock so that chained transforms never
fall back to quadrature unless the base curve requires it.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, NumericError, ParameterError, SpecError
from .quadrature import cumulative, integrate

Func = Callable[[np.ndarray], np.ndarray]

_FD_REL_STEP = 1e-3


def _as_array(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class TransformParams:
    """Parameters ``(α, β)`` of the two-parameter transformations, ``α != 0``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ParameterError(f"non-finite transform parameters ({self.alpha}, {self.beta})")
        if self.alpha == 0.0:
            raise ParameterError("alpha must be non-zero")

    @property
    def zeta(self) -> float:
        """Explosion time ``-1/(αβ)`` when ``αβ < 0``, otherwise ``inf``."""
        ab = self.alpha * self.beta
        return -1.0 / ab if ab < 0 else math.inf

    def time_map(self, t):
        """``u(t) = α²t/(1+αβt)``."""
        t = np.asarray(t, dtype=float)
        return self.alpha**2 * t / (1.0 + self.alpha * self.beta * t)

    def inverse_time_map(self, v):
        """Inverse of :meth:`time_map`: ``v/(α² - αβv)``."""
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            return v / (self.alpha**2 - self.alpha * self.beta * v)


@dataclass(frozen=True)
class DomainInfo:
    """Horizon ``a`` of a curve and the clock limit ``b = τf(a-)``."""

    a: float
    b: float


def compose_params(p: TransformParams, q: TransformParams) -> TransformParams:
    """Parameters of ``S^p ∘ S^q`` (apply ``q`` first)."""
    return TransformParams(p.alpha * q.alpha, p.alpha * q.beta + p.beta / q.alpha)


def normalize_sign(p: TransformParams) -> tuple[TransformParams, bool]:
    """Map ``α < 0`` to ``(-α, -β)``; the flag says the curve sign flipped."""
    if p.alpha < 0:
        return TransformParams(-p.alpha, -p.beta), True
    return p, False


@dataclass(frozen=True, eq=False)
class Curve:
    """A boundary curve with optional analytic clock and derivatives.

    ``tau_fn``/``tau_inv_fn`` are fast paths for the clock and its inverse;
    ``d1``/``d2`` are analytic first and second derivatives. Any of them may
    be ``None``, in which case quadrature, root finding or finite differences
    are used.
    """

    func: Func
    horizon: float = math.inf
    kind: str = "callable"
    params: tuple = ()
    inner: Optional["Curve"] = None
    tau_fn: Optional[Func] = None
    tau_inv_fn: Optional[Func] = None
    d1: Optional[Func] = None
    d2: Optional[Func] = None
    tau_end: Optional[float] = None
    breakpoints: tuple = ()
    sign: int = 0
    tau_end_source: Optional[Callable[[], float]] = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: Any = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError(f"curve horizon must be positive, got {self.horizon}")
        if self.sign == 0:
            f0 = float(np.asarray(self.func(np.array([0.0])), dtype=float)[0])
            object.__setattr__(self, "sign", int(np.sign(f0)))

    def __call__(self, t):
        arr, scalar = _as_array(t)
        self._check_domain(arr)
        out = np.asarray(self.func(arr.ravel()), dtype=float).reshape(arr.shape)
        return _ret(out, scalar)

    def _check_domain(self, t: np.ndarray):
        if t.size and (np.any(t < 0) or np.any(t >= self.horizon) or np.any(np.isnan(t))):
            raise DomainError(f"time outside curve domain [0, {self.horizon})")

    # clock ---------------------------------------------------------------
    def tau(self, t):
        return tau(self, t)

    def rho_tau(self, s):
        return rho_tau(self, s)

    @property
    def tau_total(self) -> float:
        """``b = τf(a-)``, computed once and cached."""
        with self._lock:
            if "b" not in self._cache:
                self._cache["b"] = self._compute_tau_total()
            return self._cache["b"]

    def _compute_tau_total(self) -> float:
        if self.tau_end is not None:
            return float(self.tau_end)
        if self.tau_end_source is not None:
            return float(self.tau_end_source())
        if self.tau_fn is not None and math.isinf(self.horizon):
            # probe the analytic clock for a finite limit
            vals = self.tau_fn(np.array([1e6, 1e12, 1e18]))
            if np.all(np.isfinite(vals)) and abs(vals[2] - vals[1]) <= 1e-9 * max(1.0, abs(vals[2])):
                return float(vals[2])
            return math.inf
        try:
            val, _ = integrate(self._inv_sq, 0.0, self.horizon, self._bp_inside(self.horizon))
        except NumericError:
            return math.inf
        return val if math.isfinite(val) else math.inf

    def _inv_sq(self, t):
        return 1.0 / np.asarray(self.func(t), dtype=float) ** 2

    def _bp_inside(self, upper):
        return [p for p in self.breakpoints if 0 < p < upper]

    def domain(self) -> DomainInfo:
        return DomainInfo(self.horizon, self.tau_total)

    # derivatives -----------------------------------------------------------
    def derivative(self, t):
        arr, scalar = _as_array(t)
        self._check_domain(arr)
        if self.d1 is not None:
            out = np.asarray(self.d1(arr.ravel()), dtype=float).reshape(arr.shape)
        else:
            out = _fd_derivative(self, arr, order=1)
        return _ret(out, scalar)

    def second_derivative(self, t):
        arr, scalar = _as_array(t)
        self._check_domain(arr)
        if self.d2 is not None:
            out = np.asarray(self.d2(arr.ravel()), dtype=float).reshape(arr.shape)
        else:
            out = _fd_derivative(self, arr, order=2)
        return _ret(out, scalar)

    def generic(self) -> "Curve":
        """The same function with every analytic fast path removed."""
        return Curve(self.func, self.horizon, kind="callable", breakpoints=self.breakpoints)

    def restrict(self, horizon: float) -> "Curve":
        """The curve restricted to ``[0, horizon)``."""
        if horizon > self.horizon:
            raise DomainError("cannot extend a curve beyond its horizon")
        return Curve(self.func, horizon, self.kind, self.params, self.inner, self.tau_fn,
                     self.tau_inv_fn, self.d1, self.d2, None, tuple(self._bp_inside(horizon)), self.sign)


def _fd_steps(t: np.ndarray) -> np.ndarray:
    return _FD_REL_STEP * np.maximum(1.0, np.abs(t))


def _fd_derivative(c: Curve, t: np.ndarray, order: int) -> np.ndarray:
    """Fourth-order central differences, one-sided close to ``t = 0``.

    Steps are shrunk near the horizon so that every stencil node stays inside
    the domain.
    """
    flat = t.ravel()
    h = _fd_steps(flat)
    if math.isfinite(c.horizon):
        h = np.minimum(h, np.maximum((c.horizon - flat) / 2.5, 1e-7))
    out = np.empty_like(flat)
    central = flat >= 2.0 * h
    f = c.func
    if np.any(central):
        x, s = flat[central], h[central]
        fm2, fm1, f0, fp1, fp2 = (np.asarray(f(x + k * s), dtype=float) for k in (-2, -1, 0, 1, 2))
        if order == 1:
            out[central] = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * s)
        else:
            out[central] = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * s * s)
    fwd = ~central
    if np.any(fwd):
        x, s = flat[fwd], h[fwd]
        v = [np.asarray(f(x + k * s), dtype=float) for k in range(6)]
        if order == 1:
            out[fwd] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * s)
        else:
            out[fwd] = (45 * v[0] - 154 * v[1] + 214 * v[2] - 156 * v[3] + 61 * v[4] - 10 * v[5]) / (
                12 * s * s
            )
    return out.reshape(t.shape)


# clock and inverse -----------------------------------------------------------

def tau(c: Curve, t):
    """``τf(t) = ∫_0^t f(s)^-2 ds``."""
    arr, scalar = _as_array(t)
    c._check_domain(arr)
    if c.tau_fn is not None:
        out = np.asarray(c.tau_fn(arr.ravel()), dtype=float).reshape(arr.shape)
    else:
        out = cumulative(c._inv_sq, arr.ravel(), 0.0, c.breakpoints).reshape(arr.shape)
    return _ret(out, scalar)


def rho_tau(c: Curve, s):
    """Inverse clock ``(τf)^{-1}(s)`` for ``0 <= s < τf(a-)``."""
    arr, scalar = _as_array(s)
    if arr.size and (np.any(arr < 0) or np.any(np.isnan(arr))):
        raise DomainError("inverse clock argument must be non-negative")
    if c.tau_end is not None and arr.size and np.any(arr >= c.tau_end):
        raise DomainError(f"inverse clock argument outside [0, {c.tau_end})")
    if c.tau_inv_fn is not None:
        out = np.asarray(c.tau_inv_fn(arr.ravel()), dtype=float).reshape(arr.shape)
        if np.any(np.isnan(out)):
            raise DomainError("inverse clock argument outside its range")
        return _ret(out, scalar)
    return _ret(_invert_clock(c, arr.ravel()).reshape(arr.shape), scalar)


def _invert_clock(c: Curve, s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    todo = s > 0
    if not np.any(todo):
        return out
    target = s[todo]
    lo = np.zeros_like(target)
    hi = np.empty_like(target)
    # bracket: grow an upper point until the clock exceeds the target
    finite = math.isfinite(c.horizon)
    probe = c.horizon * 0.5 if finite else 1.0
    tau_probe = tau(c, probe)
    pending = np.ones(target.size, dtype=bool)
    for k in range(2000):
        hit = pending & (tau_probe >= target)
        hi[hit] = probe
        pending &= ~hit
        if not np.any(pending):
            break
        lo[pending] = probe
        if finite:
            nxt = c.horizon - (c.horizon - probe) * 0.5
            if nxt >= c.horizon or nxt == probe:
                raise DomainError("inverse clock argument beyond τf(a-)")
            probe = nxt
        else:
            probe *= 2.0
            if probe > 1e300:
                raise DomainError("inverse clock argument beyond τf(∞)")
        tau_probe = tau(c, probe)
    # safeguarded Newton: t <- t - (τ(t) - s) f(t)^2, bisection fallback
    t = 0.5 * (lo + hi)
    for _ in range(200):
        val = tau(c, t) - target
        lo = np.where(val < 0, t, lo)
        hi = np.where(val > 0, t, hi)
        step = val * np.asarray(c.func(t), dtype=float) ** 2
        cand = t - step
        bad = ~((cand > lo) & (cand < hi)) | ~np.isfinite(cand)
        new = np.where(bad, 0.5 * (lo + hi), cand)
        done = np.abs(new - t) <= 4e-16 * np.maximum(np.abs(t), 1e-300) + 1e-300
        t = new
        if np.all(done | (hi - lo <= 4e-16 * np.abs(hi))):
            break
    else:  # pragma: no cover - defensive
        raise NumericError("inverse clock iteration did not converge")
    out[todo] = t
    return out


# operators -----------------------------------------------------------------

def sigma(c: Curve) -> Curve:
    """``Σf = 1 / f((τf)^{-1})`` on ``[0, τf(a-))``."""
    b = c.tau_total
    if not b > 0:
        raise DomainError("clock of the curve vanishes identically")

    def func(s):
        return 1.0 / np.asarray(c.func(rho_tau(c, s)), dtype=float)

    d1 = d2 = None
    if c.d1 is not None:
        def d1(s):
            return -np.asarray(c.d1(rho_tau(c, s)), dtype=float)
    if c.d2 is not None:
        def d2(s):
            u = rho_tau(c, s)
            return -np.asarray(c.d2(u), dtype=float) * np.asarray(c.func(u), dtype=float) ** 2

    return Curve(
        func, b, kind="sigma_image", inner=c,
        tau_fn=lambda s: rho_tau(c, s), tau_inv_fn=lambda t: tau(c, t),
        d1=d1, d2=d2, tau_end=c.horizon, sign=c.sign,
    )


def pi(p: TransformParams, c: Curve) -> Curve:
    """``Π^{α,β} f = f (α + β τf)``, truncated where the factor vanishes."""
    al, be = p.alpha, p.beta
    b = c.tau_total
    horizon = c.horizon
    truncated = False
    if al * be < 0:
        cut = -al / be
        # an infinite clock always reaches the cut, even when -α/β overflows
        if cut < b or math.isinf(b):
            horizon = float(rho_tau(c, cut)) if math.isfinite(cut) else c.horizon
            truncated = True

    def factor(t):
        return al + be * tau(c, t)

    def func(t):
        return np.asarray(c.func(t), dtype=float) * factor(t)

    def tau_fn(t):
        tf = tau(c, t)
        return tf / (al * (al + be * tf))

    def tau_inv(s):
        return rho_tau(c, al * al * s / (1.0 - al * be * s))

    if truncated:
        tau_end = math.inf
    elif math.isinf(b):
        tau_end = 1.0 / (al * be) if be != 0 else math.inf
    else:
        tau_end = b / (al * (al + be * b))

    def d1(t):
        f = np.asarray(c.func(t), dtype=float)
        return c.derivative(t) * factor(t) + be / f

    def d2(t):
        return c.second_derivative(t) * factor(t)

    return Curve(
        func, horizon, kind="pi_image", params=(al, be), inner=c,
        tau_fn=tau_fn, tau_inv_fn=tau_inv, d1=d1, d2=d2, tau_end=tau_end,
        breakpoints=tuple(x for x in c.breakpoints if x < horizon),
    )


def _s_horizon(p: TransformParams, a: float) -> tuple[float, bool]:
    """Horizon of ``S^p f`` for a curve with horizon ``a``, and whether the
    time map sends the new domain onto all of ``[0, a)``."""
    al, be = p.alpha, p.beta
    if math.isinf(a):
        covers = be == 0 or al * be < 0
        a_new = -1.0 / (al * be) if al * be < 0 else math.inf
    else:
        covers = al * (al - be * a) > 0
        a_new = a / (al * (al - be * a)) if covers else math.inf
    return min(a_new, p.zeta), covers


def horizon_info(p: TransformParams, dom: DomainInfo, c: Curve) -> DomainInfo:
    """Horizon and clock limit of ``S^{α,β} f`` given those of ``f``."""
    a_new, covers = _s_horizon(p, dom.a)
    b_new = dom.b if covers else float(tau(c, p.alpha / p.beta))
    return DomainInfo(a_new, b_new)


def s_transform(p: TransformParams, c: Curve) -> Curve:
    """``S^{α,β} f(t) = (1+αβt)/α · f(α²t/(1+αβt))``."""
    if not isinstance(p, TransformParams):
        p = TransformParams(*p)
    al, be = p.alpha, p.beta
    a_new, covers = _s_horizon(p, c.horizon)
    # the clock limit is computed on demand: for tiny β it needs τf(α/β) far out
    tau_end = c.tau_end if covers else None
    if covers:
        source = (lambda: c.tau_total) if tau_end is None else None
    else:
        source = lambda: float(tau(c, al / be))  # noqa: E731

    def u(t):
        return al * al * t / (1.0 + al * be * t)

    def func(t):
        t = np.asarray(t, dtype=float)
        return (1.0 + al * be * t) / al * np.asarray(c.func(u(t)), dtype=float)

    def d1(t):
        t = np.asarray(t, dtype=float)
        w = u(t)
        return be * np.asarray(c.func(w), dtype=float) + al * c.derivative(w) / (1.0 + al * be * t)

    def d2(t):
        t = np.asarray(t, dtype=float)
        return al**3 * c.second_derivative(u(t)) / (1.0 + al * be * t) ** 3

    def tau_fn(t):
        return tau(c, u(np.asarray(t, dtype=float)))

    def tau_inv(s):
        v = rho_tau(c, s)
        return v / (al * al - al * be * v)

    return Curve(
        func, a_new, kind="s_image", params=(al, be), inner=c,
        tau_fn=tau_fn, tau_inv_fn=tau_inv, d1=d1, d2=d2, tau_end=tau_end,
        breakpoints=tuple(float(p.inverse_time_map(x)) for x in c.breakpoints
                          if 0 < float(p.inverse_time_map(x)) < a_new),
        sign=c.sign * (1 if al > 0 else -1), tau_end_source=source,
    )


# families ------------------------------------------------------------------

def affine(a0: float, b0: float) -> Curve:
    """``a0 + b0 t`` on the region where it stays away from zero."""
    if a0 == 0:
        raise ParameterError("affine boundary must not vanish at t = 0")
    horizon = -a0 / b0 if a0 * b0 < 0 else math.inf
    if b0 == 0:
        tau_end = math.inf
    elif a0 * b0 > 0:
        tau_end = 1.0 / (a0 * b0)
    else:
        tau_end = math.inf

    def tau_inv(s):
        s = np.asarray(s, dtype=float)
        return a0 * a0 * s / (1.0 - a0 * b0 * s)

    return Curve(
        lambda t: a0 + b0 * np.asarray(t, dtype=float), horizon, kind="affine", params=(a0, b0),
        tau_fn=lambda t: np.asarray(t, dtype=float) / (a0 * (a0 + b0 * np.asarray(t, dtype=float))),
        tau_inv_fn=tau_inv,
        d1=lambda t: np.full(np.shape(t), float(b0)),
        d2=lambda t: np.zeros(np.shape(t)),
        tau_end=tau_end,
    )


def constant(c: float) -> Curve:
    return affine(c, 0.0)


def power_law(kappa: float, gamma: float) -> Curve:
    """``(κt + 1)^γ``."""
    if kappa < 0 or not math.isfinite(kappa) or not math.isfinite(gamma):
        raise ParameterError("power law needs a finite kappa >= 0")
    if kappa == 0 or gamma == 0:
        return affine(1.0, 0.0)
    e = 1.0 - 2.0 * gamma

    def func(t):
        return (kappa * np.asarray(t, dtype=float) + 1.0) ** gamma

    if abs(e) < 1e-14:
        def tau_fn(t):
            return np.log1p(kappa * np.asarray(t, dtype=float)) / kappa

        def tau_inv(s):
            return np.expm1(kappa * np.asarray(s, dtype=float)) / kappa

        tau_end = math.inf
    else:
        def tau_fn(t):
            return np.expm1(e * np.log1p(kappa * np.asarray(t, dtype=float))) / (kappa * e)

        def tau_inv(s):
            s = np.asarray(s, dtype=float)
            with np.errstate(invalid="ignore", divide="ignore"):
                return np.expm1(np.log1p(kappa * e * s) / e) / kappa

        tau_end = -1.0 / (kappa * e) if e < 0 else math.inf

    return Curve(
        func, math.inf, kind="power_law", params=(kappa, gamma),
        tau_fn=tau_fn, tau_inv_fn=tau_inv,
        d1=lambda t: gamma * kappa * (kappa * np.asarray(t, dtype=float) + 1.0) ** (gamma - 1),
        d2=lambda t: gamma * (gamma - 1) * kappa**2 * (kappa * np.asarray(t, dtype=float) + 1.0) ** (gamma - 2),
        tau_end=tau_end,
    )


def quadratic(kappa: float) -> Curve:
    """``1 + κ²t²``."""
    if not math.isfinite(kappa):
        raise ParameterError("kappa must be finite")
    k = abs(kappa)
    if k == 0:
        return affine(1.0, 0.0)

    def tau_fn(t):
        x = k * np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):  # x / inf = 0 is the right limit
            return (x / (1.0 + x * x) + np.arctan(x)) / (2.0 * k)

    return Curve(
        lambda t: 1.0 + (k * np.asarray(t, dtype=float)) ** 2, math.inf, kind="quadratic",
        params=(k,), tau_fn=tau_fn,
        d1=lambda t: 2.0 * k * k * np.asarray(t, dtype=float),
        d2=lambda t: np.full(np.shape(t), 2.0 * k * k),
        tau_end=math.pi / (4.0 * k),
    )


def shifted_quadratic(kappa: float) -> Curve:
    """``(1 + κt)²``."""
    c = power_law(kappa, 2.0)
    return Curve(c.func, c.horizon, kind="shifted_quadratic", params=(kappa,), tau_fn=c.tau_fn,
                 tau_inv_fn=c.tau_inv_fn, d1=c.d1, d2=c.d2, tau_end=c.tau_end)


def tabulated(t, f) -> Curve:
    """Monotone cubic (PCHIP) interpolant of the samples; horizon ``t[-1]``."""
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    if t.ndim != 1 or t.shape != f.shape or t.size < 2:
        raise SpecError("table needs matching 1-d arrays with at least two points")
    if t[0] != 0 or np.any(np.diff(t) <= 0):
        raise SpecError("table times must start at 0 and increase strictly")
    if np.any(f == 0) or np.any(np.sign(f) != np.sign(f[0])):
        raise DomainError("tabulated boundary must not vanish or change sign")
    interp = PchipInterpolator(t, f, extrapolate=False)
    d1 = interp.derivative(1)
    d2 = interp.derivative(2)
    return Curve(
        lambda x: interp(np.asarray(x, dtype=float)), float(t[-1]),
        kind="tabulated", params=(tuple(t), tuple(f)),
        d1=lambda x: d1(np.asarray(x, dtype=float)), d2=lambda x: d2(np.asarray(x, dtype=float)),
        breakpoints=tuple(t[1:-1]),
    )


def from_callable(func: Func, horizon: float = math.inf, derivative: Optional[Func] = None,
                  second_derivative: Optional[Func] = None) -> Curve:
    """Wrap an arbitrary vectorised function as a curve (clock by quadrature)."""
    return Curve(lambda t: np.asarray(func(np.asarray(t, dtype=float)), dtype=float), horizon,
                 d1=derivative, d2=second_derivative)


# JSON specifications ---------------------------------------------------------

def _num(spec: dict, key: str) -> float:
    if key not in spec:
        raise SpecError(f"curve spec of kind {spec.get('kind')!r} is missing {key!r}")
    try:
        val = float(spec[key])
    except (TypeError, ValueError) as exc:
        raise SpecError(f"field {key!r} is not a number") from exc
    if not math.isfinite(val):
        raise SpecError(f"field {key!r} must be finite")
    return val


def curve_from_spec(spec: Any) -> Curve:
    """Build a curve from a JSON object, a JSON string or a compact string.

    Compact strings look like ``affine:1,0.5`` or ``quadratic:1``.
    """
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("{"):
            try:
                spec = json.loads(text)
            except json.JSONDecodeError as exc:
                raise SpecError(f"invalid JSON curve spec: {exc}") from exc
        else:
            spec = _parse_compact(text)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("curve spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "constant":
        return constant(_num(spec, "c"))
    if kind == "affine":
        return affine(_num(spec, "a0"), _num(spec, "b0"))
    if kind == "power":
        return power_law(_num(spec, "kappa"), _num(spec, "gamma"))
    if kind == "quadratic":
        return quadratic(_num(spec, "kappa"))
    if kind == "shifted_quadratic":
        return shifted_quadratic(_num(spec, "kappa"))
    if kind == "transformed":
        if "inner" not in spec:
            raise SpecError("transformed curve spec needs an 'inner' curve")
        p = TransformParams(_num(spec, "alpha"), _num(spec, "beta"))
        return s_transform(p, curve_from_spec(spec["inner"]))
    if kind == "table":
        if "t" not in spec or "f" not in spec:
            raise SpecError("table spec needs 't' and 'f'")
        try:
            return tabulated(np.asarray(spec["t"], dtype=float), np.asarray(spec["f"], dtype=float))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, (SpecError, DomainError)):
                raise
            raise SpecError(f"bad table values: {exc}") from exc
    raise SpecError(f"unknown curve kind {kind!r}")


_COMPACT_FIELDS = {
    "constant": ("c",),
    "affine": ("a0", "b0"),
    "power": ("kappa", "gamma"),
    "quadratic": ("kappa",),
    "shifted_quadratic": ("kappa",),
}


def _parse_compact(text: str) -> dict:
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind not in _COMPACT_FIELDS:
        raise SpecError(f"unknown curve kind {kind!r}")
    names = _COMPACT_FIELDS[kind]
    parts = [x for x in rest.split(",") if x.strip()] if rest else []
    if len(parts) != len(names):
        raise SpecError(f"{kind} expects {len(names)} value(s): {','.join(names)}")
    return {"kind": kind, **dict(zip(names, parts))}
