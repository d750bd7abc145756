"""Linear Sturm-Liouville problems and the non-linear boundary equation.

For a non-negative measure density ``m`` the problem

    φ'' = m φ,   φ(0) = 1,   φ > 0 decreasing on [0, ∞)

has a unique solution, and ``Σφ`` solves ``f³ f'' + m(τf) = 0`` with
``f(0) = 1`` and ``f`` increasing and concave. Every other positive
solution is obtained from that one with an ``S``-transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .curves import Curve, TransformParams, s_transform, sigma, tau
from .errors import ConsistencyError, DomainError, NumericError, ParameterError, SpecError

RTOL = 1e-12
ATOL = 1e-15


@dataclass(frozen=True, eq=False)
class MeasureDensity:
    """Density of a non-negative measure on ``[0, ∞)``."""

    density: Callable[[np.ndarray], np.ndarray]
    kind: str
    params: tuple
    sup: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self.density(t), dtype=float)
        return float(out) if out.ndim == 0 else out


def constant_measure(a: float) -> MeasureDensity:
    if not a > 0 or not math.isfinite(a):
        raise ParameterError("constant measure density must be positive and finite")
    return MeasureDensity(lambda t: np.full(np.shape(t), float(a)), "constant", (a,), a)


def rational_measure(a: float, b: float) -> MeasureDensity:
    """``m(t) = a / (1 + b t)²``."""
    if not a > 0 or b < 0 or not (math.isfinite(a) and math.isfinite(b)):
        raise ParameterError("rational measure needs a > 0 and b >= 0")
    return MeasureDensity(lambda t: a / (1.0 + b * np.asarray(t, dtype=float)) ** 2,
                          "rational", (a, b), a)


def tabulated_measure(t, m) -> MeasureDensity:
    """Piecewise linear density, held constant beyond the last node."""
    t = np.asarray(t, dtype=float)
    m = np.asarray(m, dtype=float)
    if t.ndim != 1 or t.shape != m.shape or t.size < 2 or t[0] != 0 or np.any(np.diff(t) <= 0):
        raise SpecError("measure table needs increasing times starting at 0")
    if np.any(m < 0) or not np.any(m > 0):
        raise ParameterError("measure density must be non-negative and not identically zero")
    return MeasureDensity(lambda x: np.interp(np.asarray(x, dtype=float), t, m), "table",
                          (tuple(t), tuple(m)), float(m.max()))


def measure_from_spec(spec) -> MeasureDensity:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("measure spec must be an object with a 'kind' field")
    try:
        kind = spec["kind"]
        if kind == "constant":
            return constant_measure(float(spec["a"]))
        if kind == "rational":
            return rational_measure(float(spec["a"]), float(spec["b"]))
        if kind == "table":
            return tabulated_measure(spec["t"], spec["m"])
    except KeyError as exc:
        raise SpecError(f"measure spec is missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (ParameterError, SpecError)):
            raise
        raise SpecError(f"bad measure spec: {exc}") from exc
    raise SpecError(f"unknown measure kind {spec['kind']!r}")


@dataclass(frozen=True, eq=False)
class SlSolution:
    """Decreasing solution of ``φ'' = mφ`` on ``[0, t_max]``."""

    phi: Curve
    slope: float
    bracket: tuple[float, float]
    t_max: float
    shoot_horizon: float


def _rhs(m: MeasureDensity, with_clock: bool = True):
    # the clock component 1/φ² is left out while shooting, it blows up where φ dies
    if with_clock:
        def f(t, y):
            return [y[1], float(m(t)) * y[0], 1.0 / (y[0] * y[0])]
    else:
        def f(t, y):
            return [y[1], float(m(t)) * y[0]]
    return f


def _classify(m: MeasureDensity, s: float, horizon: float) -> str:
    """'low' if φ hits zero, 'high' if φ' turns positive, else 'open'."""
    def hit_zero(t, y):
        return y[0]
    hit_zero.terminal = True
    hit_zero.direction = -1

    def turn(t, y):
        return y[1]
    turn.terminal = True
    turn.direction = 1

    sol = solve_ivp(_rhs(m, with_clock=False), (0.0, horizon), [1.0, s], method="DOP853",
                    rtol=RTOL, atol=ATOL, events=(hit_zero, turn))
    if sol.status == -1:
        raise NumericError(f"ODE integration failed: {sol.message}")
    if sol.t_events[0].size:
        return "low"
    if sol.t_events[1].size:
        return "high"
    return "open"


def solve_sl(measure: MeasureDensity, t_max: float, tau_target: float | None = None,
             max_doublings: int = 12) -> SlSolution:
    """Shoot on ``φ'(0)`` for the decreasing positive solution.

    The returned curve lives on ``[0, t_max]``; if ``tau_target`` is given the
    range is extended until ``τφ`` reaches it.
    """
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    horizon = max(t_max, 50.0 / math.sqrt(measure.sup))
    lo = -1.0
    while _classify(measure, lo, horizon) != "low":
        lo *= 2.0
        if lo < -1e8:
            raise NumericError("could not bracket the initial slope")
    hi = 0.0
    doublings = 0
    while hi - lo > 4e-16 * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        kind = _classify(measure, mid, horizon)
        if kind == "low":
            lo = mid
        elif kind == "high":
            hi = mid
        else:
            if doublings >= max_doublings:
                break
            horizon *= 2.0
            doublings += 1
    slope = 0.5 * (lo + hi)

    end = t_max
    events = None
    if tau_target is not None:
        def reach(t, y):
            return y[2] - tau_target
        reach.terminal = True
        reach.direction = 1
        events = reach
        end = max(t_max, horizon)
    sol = solve_ivp(_rhs(measure), (0.0, end), [1.0, slope, 0.0], method="DOP853",
                    rtol=RTOL, atol=ATOL, dense_output=True, events=events)
    if sol.status == -1:
        raise NumericError(f"ODE integration failed: {sol.message}")
    if tau_target is not None:
        if not sol.t_events[0].size:
            raise DomainError("the clock of φ does not reach the requested range")
        end = max(t_max, float(sol.t_events[0][0]) * (1 + 1e-9))
        end = min(end, float(sol.t[-1]))
    dense = sol.sol
    phi = _dense_curve(dense, measure, end)
    if np.any(phi(np.linspace(0, end * (1 - 1e-12), 257)) <= 0):
        raise ConsistencyError("shooting produced a non-positive solution")
    return SlSolution(phi, slope, (lo, hi), end, horizon)


def _dense_curve(dense, measure: MeasureDensity, end: float) -> Curve:
    def comp(i):
        def g(t):
            return dense(np.asarray(t, dtype=float))[i]
        return g

    phi_val = comp(0)
    # the horizon sits a hair beyond the requested end so that end itself is usable
    horizon = end * (1 + 1e-12) + 1e-300
    tau_fn = comp(2)
    return Curve(
        phi_val, horizon, kind="sl_solution", params=(measure.kind,) + measure.params,
        tau_fn=tau_fn, d1=comp(1), tau_end=float(tau_fn(horizon)),
        d2=lambda t: np.asarray(measure(t)) * phi_val(t),
    )


def solve_nonlinear(measure: MeasureDensity, t_max: float) -> Curve:
    """Increasing concave solution of ``f³f'' + m(τf) = 0`` with ``f(0) = 1``.

    Built as ``Σφ`` from :func:`solve_sl`. The result carries no analytic
    second derivative, so residual checks use finite differences.
    """
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    sl = solve_sl(measure, 1e-3, tau_target=t_max * 1.01)
    ff = sigma(sl.phi)
    horizon = min(ff.horizon, t_max * (1 + 1e-9))
    out = Curve(ff.func, horizon, kind="nonlinear_solution", params=(measure.kind,) + measure.params,
                inner=sl.phi, tau_fn=ff.tau_fn, tau_inv_fn=ff.tau_inv_fn, d1=ff.d1)
    grid = np.linspace(0.0, t_max, 65)
    vals = out(grid)
    if abs(vals[0] - 1.0) > 1e-10 or np.any(np.diff(vals) < -1e-12):
        raise ConsistencyError("non-linear solution is not increasing from 1")
    second = np.diff(vals, 2)
    if np.any(second > 1e-10 * max(1.0, float(np.max(np.abs(vals))))):
        raise ConsistencyError("non-linear solution is not concave")
    return out


def power_law_solution(a: float, b: float) -> Curve:
    """Closed-form solution ``(κt+1)^γ`` for ``m = a/(1+bt)²``."""
    from .curves import power_law

    if not a > 0 or b < 0:
        raise ParameterError("need a > 0 and b >= 0")
    kappa = math.sqrt(4 * a + b * b)
    gamma = 0.5 * (1 - b / kappa)
    return power_law(kappa, gamma)


class Residual(NamedTuple):
    value: np.ndarray | float
    method: str


def nonlinear_residual(curve: Curve, measure: MeasureDensity, t, method: str = "auto") -> Residual:
    """``f³ f'' + m(τf)`` at ``t``; reports whether ``f''`` was analytic or differenced."""
    if method not in ("auto", "analytic", "fd"):
        raise ParameterError(f"unknown residual method {method!r}")
    t_arr = np.asarray(t, dtype=float)
    if method == "fd" or (method == "auto" and curve.d2 is None):
        from .curves import _fd_derivative

        curve._check_domain(t_arr)
        f2 = _fd_derivative(curve, t_arr, order=2)
        used = "fd"
    else:
        if curve.d2 is None:
            raise ParameterError("curve has no analytic second derivative")
        f2 = curve.second_derivative(t_arr)
        used = "analytic"
    f = curve(t_arr)
    val = f**3 * f2 + measure(tau(curve, t_arr))
    return Residual(float(val) if np.ndim(val) == 0 else val, used)


def decompose_solution(curve: Curve, base: Curve, check_tol: float = 1e-6) -> TransformParams:
    """Find ``(α, β)`` with ``curve = S^{α,β} base``.

    ``α = 1/f(0)`` and ``β = f'(0) - base'(0)/f(0)``; the identity is then
    verified on a grid and a :class:`ConsistencyError` raised if it fails.
    """
    f0 = curve(0.0)
    if f0 == 0:
        raise DomainError("curve vanishes at 0")
    alpha = 1.0 / f0
    beta = curve.derivative(0.0) - base.derivative(0.0) / f0
    params = TransformParams(alpha, beta)
    image = s_transform(params, base)
    top = min(curve.horizon, image.horizon, 10.0)
    grid = np.linspace(0.0, top, 41)[:-1]
    lhs, rhs = curve(grid), image(grid)
    err = np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs)))
    if err > check_tol:
        raise ConsistencyError(f"curve is not an S-image of the base (mismatch {err:.3g})")
    return params
