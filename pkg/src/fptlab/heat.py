"""Heat equation below a moving absorbing boundary, and its symmetry group.

``h(x, t) = P(B_t ∈ dx, t < T^f)/dx`` solves ``∂_t h = ½∂_xx h`` on
``x < f(t)`` with ``h(f(t), t) = 0``. In the boundary-fitted coordinate
``y = f(t) - x`` the function ``u(y, t) = h(f(t) - y, t)`` satisfies

    ∂_t u = ½ ∂_yy u - f'(t) ∂_y u,   u(0, t) = 0,

which is solved with Crank-Nicolson. The first passage density is the flux
``½ ∂_y u(0, t)``.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg.lapack import dgtsv

from .curves import Curve, TransformParams, s_transform
from .densities import FptDensity, transform_density
from .errors import DomainError, NumericError, ParameterError

SpaceTime = Callable[[np.ndarray, np.ndarray], np.ndarray]

_TAIL_SIGMAS = 8.0


def gaussian_kernel(x, t):
    """Fundamental solution ``e^{-x²/2t} / √(2πt)``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.exp(-x * x / (2.0 * t)) / np.sqrt(2.0 * np.pi * t)


def image_solution(x, t, level: float = 1.0):
    """Exact solution below the constant boundary ``level`` (method of images)."""
    x = np.asarray(x, dtype=float)
    return np.where(x < level, gaussian_kernel(x, t) - gaussian_kernel(x - 2.0 * level, t), 0.0)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Stored slices of ``u(y, t)`` together with the boundary flux at every step."""

    t_nodes: np.ndarray
    y_nodes: np.ndarray
    values: np.ndarray
    curve: Curve
    L: float
    t0: float
    flux_t: np.ndarray
    flux: np.ndarray
    dt: float
    dy: float

    def survival(self, index: int = -1) -> float:
        """``∫ u dy`` on a stored slice (trapezoid rule, zero end values)."""
        return float(np.sum(self.values[index]) * self.dy)

    def slice_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.t_nodes - t)))
        if abs(self.t_nodes[i] - t) > 1e-9 * max(1.0, t):
            raise DomainError(f"no stored slice at t={t}")
        return self.values[i]

    def __call__(self, x, t):
        """``h(x, t)`` by linear interpolation in ``y`` and ``t``.

        Before ``t0`` the free Gaussian kernel is returned (its crossing mass is
        below 1e-14 there).
        """
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        x, t = np.broadcast_arrays(x, t)
        flat_x, flat_t = x.ravel(), t.ravel()
        if np.any(flat_t > self.t_nodes[-1] * (1 + 1e-12)) or np.any(flat_t <= 0):
            raise DomainError("time outside the solved window")
        out = np.zeros(flat_x.size)
        early = flat_t < self.t_nodes[0]
        if np.any(early):
            out[early] = gaussian_kernel(flat_x[early], flat_t[early])
        late = ~early
        if np.any(late):
            tl = np.minimum(flat_t[late], self.t_nodes[-1])
            y = np.asarray(self.curve(tl)) - flat_x[late]
            k = np.clip(np.searchsorted(self.t_nodes, tl, side="right") - 1, 0, self.t_nodes.size - 2)
            t_lo, t_hi = self.t_nodes[k], self.t_nodes[k + 1]
            w = np.where(t_hi > t_lo, (tl - t_lo) / np.where(t_hi > t_lo, t_hi - t_lo, 1.0), 0.0)
            v_lo = self._interp_rows(k, y)
            v_hi = self._interp_rows(k + 1, y)
            out[late] = (1 - w) * v_lo + w * v_hi
        return out.reshape(x.shape)

    def _interp_rows(self, rows: np.ndarray, y: np.ndarray) -> np.ndarray:
        pos = y / self.dy
        j = np.clip(np.floor(pos).astype(int), 0, self.y_nodes.size - 2)
        frac = pos - j
        v = (1 - frac) * self.values[rows, j] + frac * self.values[rows, j + 1]
        return np.where((y >= 0) & (y <= self.L), v, 0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,y,h\n")
        for t, row in zip(self.t_nodes, self.values):
            for y, v in zip(self.y_nodes, row):
                buf.write(f"{t:.17g},{y:.17g},{v:.17g}\n")
        return buf.getvalue()


def _start_time(f: Curve) -> float:
    f0 = f(0.0)
    t0 = (f0 / _TAIL_SIGMAS) ** 2
    for _ in range(200):
        probe = np.linspace(0.0, t0, 65)
        if np.min(f(probe)) >= _TAIL_SIGMAS * math.sqrt(t0):
            return t0
        t0 *= 0.8
    raise DomainError("boundary dips to zero too fast for a Gaussian start")


def solve_bvp(f: Curve, t_max: float, dy: float = 5e-3, dt: float = 2e-4, L: Optional[float] = None,
              output_times: Optional[Sequence[float]] = None,
              store_every: Optional[int] = None) -> GridFunction:
    """Crank-Nicolson solution of the absorbed heat equation below ``f`` on ``(t0, t_max]``."""
    if not t_max > 0 or not dy > 0 or not dt > 0:
        raise ParameterError("t_max, dy and dt must be positive")
    if f.sign <= 0:
        raise ParameterError("boundary must start above the origin")
    if t_max >= f.horizon:
        raise DomainError("t_max outside the domain of the boundary")
    t0 = _start_time(f)
    if t0 >= t_max:
        raise DomainError("t_max is shorter than the Gaussian start time")
    probe = np.linspace(t0, t_max, 401)
    fmax = float(np.max(f(probe)))
    if L is None:
        L = fmax + _TAIL_SIGMAS * math.sqrt(t_max) + 1.0
    J = int(math.ceil(L / dy))
    L = J * dy
    y = np.linspace(0.0, L, J + 1)

    # time nodes: the uniform grid plus every requested output time
    grid = t0 + dt * np.arange(int(math.ceil((t_max - t0) / dt * (1 - 1e-12))) + 1)
    grid[-1] = t_max
    outs = np.unique(np.asarray(output_times if output_times is not None else [], dtype=float))
    if outs.size:
        if outs[0] < t0 or outs[-1] > t_max * (1 + 1e-12):
            raise DomainError(f"output times must lie in [{t0:.3g}, {t_max}]")
        outs = np.minimum(outs, t_max)
        near = np.abs(grid[:, None] - outs[None, :]).min(axis=1) < 1e-6 * dt
        grid = np.union1d(grid[~near], outs)
    nodes = grid
    fp_nodes = np.asarray(f.derivative(nodes))
    mids = 0.5 * (nodes[1:] + nodes[:-1])
    fp_mid = np.asarray(f.derivative(mids))
    if not (np.all(np.isfinite(fp_nodes)) and np.all(np.isfinite(fp_mid))):
        raise ParameterError("boundary derivative is not finite; the curve must be differentiable")

    f_t0 = f(t0)
    u = np.asarray(gaussian_kernel(f_t0 - y, t0))
    u[0] = u[-1] = 0.0
    if outs.size:
        store = np.isin(nodes, outs)
    else:
        every = store_every or max(1, (nodes.size - 1) // 200)
        store = np.zeros(nodes.size, dtype=bool)
        store[::every] = True
    store[0] = store[-1] = True

    flux = np.empty(nodes.size)
    flux[0] = 0.5 * u[1] * (1.0 / dy - fp_nodes[0])
    slices = [u.copy()] if store[0] else []
    inv2 = 0.5 / (dy * dy)
    n_int = J - 1
    warned = False
    for n in range(nodes.size - 1):
        h = nodes[n + 1] - nodes[n]
        fp = fp_mid[n]
        cfl = abs(fp) * h / dy
        theta = min(1.0, max(0.0, cfl - 1.0))
        if theta > 0 and not warned:
            warnings.warn("advection CFL above 1: blending in upwind differences", RuntimeWarning)
            warned = True
        lo = inv2 + fp / (2 * dy)
        up = inv2 - fp / (2 * dy)
        di = -2.0 * inv2
        if theta > 0:
            # blend towards one-sided differences taken from the upwind side
            side = math.copysign(1.0, fp)
            lo += side * theta * fp / (2 * dy)
            di -= side * theta * fp / dy
            up += side * theta * fp / (2 * dy)
        a = 0.5 * h
        ui = u[1:-1]
        rhs = ui + a * (di * ui + lo * u[:-2] + up * u[2:])
        dl = np.full(n_int - 1, -a * lo)
        dd = np.full(n_int, 1.0 - a * di)
        du = np.full(n_int - 1, -a * up)
        _, _, _, sol, info = dgtsv(dl, dd, du, rhs)
        if info != 0:
            raise NumericError(f"tridiagonal solve failed (info={info})")
        u[1:-1] = sol
        flux[n + 1] = 0.5 * u[1] * (1.0 / dy - fp_nodes[n + 1])
        if store[n + 1]:
            slices.append(u.copy())
    values = np.array(slices)
    if np.min(values) < -1e-10:
        warnings.warn("negative values in the heat solution; refine the grid", RuntimeWarning)
    return GridFunction(nodes[store], y, values, f, L, t0, nodes, flux, dt, dy)


def extract_density(g: GridFunction) -> FptDensity:
    """First passage density ``½ ∂_y u(0, t)`` from the conservative boundary flux."""
    ft, fl = g.flux_t, g.flux
    if np.any(fl < -1e-8 * max(1.0, float(np.max(np.abs(fl))))):
        warnings.warn("negative boundary flux; the grid is too coarse", RuntimeWarning)
    t_hi = float(ft[-1])

    def func(t):
        return np.interp(t, ft, fl, left=0.0, right=0.0)

    return FptDensity(func, t_hi * (1 + 1e-12), ("pde", g.curve.kind, g.dy, g.dt))


# symmetry group ----------------------------------------------------------------

def _st(h: SpaceTime):
    def call(x, t):
        return np.asarray(h(np.asarray(x, dtype=float), np.asarray(t, dtype=float)), dtype=float)
    return call


def lie_transform(kind: str, epsilon: float, h: SpaceTime, u: Optional[SpaceTime] = None) -> SpaceTime:
    """One-parameter symmetry groups of ``∂_t h = ½∂_xx h`` applied to ``h``.

    ``v1`` space shift, ``v2`` time shift, ``v3`` scalar multiple, ``v4``
    parabolic dilation, ``v5`` Galilean boost ``e^{-cx + c²t/2} h(x - ct, t)``
    with ``c = 2ε``, ``v6`` projective map, ``superpose`` adds ``ε u``.
    ``v5_unbalanced`` is the variant ``e^{-4εx + 8ε²t} h(x - 2εt, t)`` whose
    exponential and shift belong to different drifts; it is kept only to show
    that it is not a symmetry.
    """
    e = float(epsilon)
    hh = _st(h)
    if kind == "v1":
        return lambda x, t: hh(np.asarray(x) - e, t)
    if kind == "v2":
        return lambda x, t: hh(x, np.asarray(t) - e)
    if kind == "v3":
        return lambda x, t: math.exp(e) * hh(x, t)
    if kind == "v4":
        return lambda x, t: hh(math.exp(-e) * np.asarray(x), math.exp(-2 * e) * np.asarray(t))
    if kind == "v5":
        c = 2.0 * e

        def g5(x, t):
            x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
            return np.exp(-c * x + 0.5 * c * c * t) * hh(x - c * t, t)
        return g5
    if kind == "v5_unbalanced":
        def g5p(x, t):
            x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
            return np.exp(-4 * e * x + 8 * e * e * t) * hh(x - 2 * e * t, t)
        return g5p
    if kind == "v6":
        def g6(x, t):
            x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
            w = 1.0 + 4.0 * e * t
            if np.any(w <= 0):
                raise DomainError("1 + 4εt must be positive")
            return w**-0.5 * np.exp(-2.0 * e * x * x / w) * hh(x / w, t / w)
        return g6
    if kind == "superpose":
        if u is None:
            raise ParameterError("superpose needs a second solution u")
        uu = _st(u)
        return lambda x, t: hh(x, t) + e * uu(x, t)
    raise ParameterError(f"unknown symmetry kind {kind!r}")


def two_param_transform(params: TransformParams, h: SpaceTime) -> SpaceTime:
    """``h^{(α,β)}(x,t) = α/√(1+αβt) e^{-αβx²/(2(1+αβt))} h(αx/(1+αβt), α²t/(1+αβt))``."""
    if params.alpha <= 0:
        raise ParameterError("alpha must be positive")
    al, be = params.alpha, params.beta
    hh = _st(h)

    def g(x, t):
        x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
        w = 1.0 + al * be * t
        if np.any(w <= 0):
            raise DomainError("1 + αβt must be positive")
        return al / np.sqrt(w) * np.exp(-al * be * x * x / (2.0 * w)) * hh(al * x / w, al * al * t / w)

    return g


def lie_composition(params: TransformParams, h: SpaceTime) -> SpaceTime:
    """``exp(ln α v3) ∘ exp(-ln α v4) ∘ exp((β/4α) v6)`` applied to ``h`` (v6 first)."""
    la = math.log(params.alpha)
    g = lie_transform("v6", params.beta / (4.0 * params.alpha), h)
    g = lie_transform("v4", -la, g)
    return lie_transform("v3", la, g)


def heat_residual(h: SpaceTime, x, t, step: float):
    """Centred residual ``∂_t h - ½∂_xx h`` with equal space and time steps."""
    hh = _st(h)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    dt_part = (hh(x, t + step) - hh(x, t - step)) / (2 * step)
    dxx = (hh(x + step, t) - 2 * hh(x, t) + hh(x - step, t)) / (step * step)
    return dt_part - 0.5 * dxx


# symmetry check -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymmetryReport:
    times: np.ndarray
    sup_discrepancy: float
    per_time: np.ndarray
    density_rel_error: float
    density_window: tuple[float, float]


def bvp_symmetry_check(f: Curve, params: TransformParams, t_max: Optional[float] = None,
                       compare_times: Optional[Sequence[float]] = None, dy: float = 5e-3,
                       dt: float = 2e-4, density_window: tuple[float, float] = (0.2, 1.5),
                       tail_sigmas: float = 5.0) -> SymmetryReport:
    """Compare ``h^{(α,β)}`` of the solution below ``f`` with the solution below ``S^{α,β}f``.

    Also compares the density extracted from the second solve with
    :func:`transform_density` applied to the density extracted from the first.
    """
    if params.alpha <= 0:
        raise ParameterError("alpha must be positive")
    al, be = params.alpha, params.beta
    g_curve = s_transform(params, f)
    limit = min(g_curve.horizon, params.zeta)
    if t_max is None:
        t_max = min(2.0, 0.9 * limit)
    if not t_max < limit:
        raise DomainError("comparison window extends beyond the transform horizon")
    if compare_times is None:
        compare_times = np.linspace(0.2, t_max, 5)
    ct = np.asarray(compare_times, dtype=float)
    if np.any(ct > t_max) or np.any(ct <= 0):
        raise DomainError("comparison times outside (0, t_max]")
    u_times = np.asarray(params.time_map(ct))
    u_max = float(np.max(params.time_map(np.array([t_max, density_window[1]]))))
    u_max = max(u_max, float(np.max(u_times)))

    G = solve_bvp(g_curve, max(t_max, density_window[1]), dy, dt, output_times=ct)
    # the far field of the base solve must cover the mapped comparison region
    reach = [al * (g_curve(t) + tail_sigmas * math.sqrt(t)) / (1 + al * be * t) for t in ct]
    probe = np.linspace(0.0, u_max, 401)
    L_f = max(float(np.max(f(probe))) + _TAIL_SIGMAS * math.sqrt(u_max) + 1.0,
              1.2 * max(reach) + 1.0)
    F = solve_bvp(f, u_max, dy, dt, L=L_f, output_times=u_times)

    per = np.empty(ct.size)
    for i, (t, uu) in enumerate(zip(ct, u_times)):
        yg = G.y_nodes[G.y_nodes <= g_curve(t) + tail_sigmas * math.sqrt(t)]
        x = g_curve(t) - yg
        w = 1.0 + al * be * t
        xs = al * x / w
        ys = f(uu) - xs
        base = np.interp(ys, F.y_nodes, F.slice_at(uu), left=0.0, right=0.0)
        mapped = al / math.sqrt(w) * np.exp(-al * be * x * x / (2 * w)) * base
        per[i] = float(np.max(np.abs(mapped - G.slice_at(t)[: yg.size])))

    pg = extract_density(G)
    pt = transform_density(params, extract_density(F), f)
    tw = np.linspace(density_window[0], density_window[1], 131)
    ref = pg(tw)
    rel = float(np.max(np.abs(pt(tw) - ref) / np.maximum(np.abs(ref), 1e-300)))
    return SymmetryReport(ct, float(per.max()), per, rel, tuple(density_window))
