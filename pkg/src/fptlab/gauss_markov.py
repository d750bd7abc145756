"""Gauss-Markov processes ``X_t = φ(t)(x + ∫_0^t φ(s)^-1 dB_s)``.

The driving martingale ``M_t = ∫_0^t φ^-1 dB`` is a Brownian motion run on
the clock ``τφ``, so transitions are sampled exactly from Gaussian increments
of variance ``Δτφ``. Level hitting reuses the Monte Carlo core with that
clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import Curve, TransformParams, pi, rho_tau, sigma, tau
from .errors import DomainError, ParameterError
from .montecarlo import DEFAULT_CHUNK, FptSampleSet, _chunk_rng, first_passage, time_grid

_SAFETY = 1e-6


@dataclass(frozen=True, eq=False)
class GaussMarkovSpec:
    """Parameter curve ``φ`` with ``φ(0) = 1`` and starting point ``x0``."""

    phi: Curve
    x0: float = 0.0

    def __post_init__(self):
        f0 = self.phi(0.0)
        if abs(f0 - 1.0) > 1e-12:
            raise ParameterError(f"parameter curve must satisfy phi(0) = 1, got {f0}")
        if self.phi.sign <= 0:
            raise ParameterError("parameter curve must be positive")

    @classmethod
    def from_curve(cls, curve: Curve, x0: float = 0.0) -> "GaussMarkovSpec":
        """Normalise a positive curve by its value at 0."""
        c0 = curve(0.0)
        if not c0 > 0:
            raise ParameterError("parameter curve must be positive at 0")
        if c0 == 1.0:
            return cls(curve, x0)
        return cls(pi(TransformParams(1.0 / c0, 0.0), curve), x0)

    @property
    def horizon_b(self) -> float:
        return self.phi.horizon

    def mean(self, t):
        return self.x0 * np.asarray(self.phi(t))

    def covariance(self, s, t):
        """``φ(s ∨ t) φ(s ∧ t) τφ(s ∧ t)``."""
        lo, hi = np.minimum(s, t), np.maximum(s, t)
        return np.asarray(self.phi(hi)) * np.asarray(self.phi(lo)) * np.asarray(tau(self.phi, lo))


def sample_gm(spec: GaussMarkovSpec, times, n: int, seed: int,
              chunk_size: int = DEFAULT_CHUNK) -> np.ndarray:
    """Exact samples of ``(X_{t_1}, ..., X_{t_k})``; shape ``(n, k)``."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ParameterError("sampling times must be non-negative and non-decreasing")
    if times.size and times[-1] >= spec.horizon_b:
        raise DomainError("sampling time beyond the domain of the parameter curve")
    clock = np.concatenate([[0.0], np.asarray(tau(spec.phi, times))])
    sd = np.sqrt(np.diff(clock))
    out = np.empty((n, times.size))
    phi = np.asarray(spec.phi(times))
    for i, start in enumerate(range(0, n, chunk_size)):
        m = min(chunk_size, n - start)
        z = _chunk_rng(seed, 1, i).standard_normal((m, times.size)) * sd
        out[start:start + m] = phi * (spec.x0 + np.cumsum(z, axis=1))
    return out


def simulate_gm(spec: GaussMarkovSpec, n: int, dt: float, horizon: float, seed: int,
                level: Optional[float] = None, bridge: bool = True,
                chunk_size: int = DEFAULT_CHUNK, stream: int = 2):
    """Simulate on a ``dt`` grid up to ``horizon``.

    With ``level`` set, returns the hitting times of that level as an
    :class:`FptSampleSet`; otherwise the paths on the grid, shape ``(n, steps+1)``.
    """
    if not horizon < spec.horizon_b:
        raise DomainError("horizon must lie inside the domain of the parameter curve")
    times = time_grid(horizon, dt)
    if level is None:
        paths = sample_gm(spec, times[1:], n, seed, chunk_size)
        return np.hstack([np.full((n, 1), spec.x0), paths])
    if level == spec.x0:
        raise ParameterError("level must differ from the starting point")
    clock = np.asarray(tau(spec.phi, times))
    sgn = 1.0 if level > spec.x0 else -1.0
    barrier = sgn * (level / np.asarray(spec.phi(times)) - spec.x0)
    hits, censored = first_passage(times, clock, barrier, int(n), seed, bridge, chunk_size,
                                   stream=stream)
    cfg = {"dt": float(times[1] - times[0]), "horizon": float(horizon), "seed": int(seed),
           "bridge": bool(bridge), "chunk_size": int(chunk_size), "level": float(level)}
    return FptSampleSet(hits, censored, int(n), cfg)


def time_change_fpt(f: Curve, n: int, dt: float, seed: int, horizon: float,
                    bridge: bool = True, chunk_size: int = DEFAULT_CHUNK) -> FptSampleSet:
    """First passage of ``B`` through ``f`` via a level hitting of a Gauss-Markov process.

    With ``φ = Σf`` and ``T`` the first time the process driven by ``φ/φ(0)``
    (started at 0) hits 1, the identity ``T^f = τφ(T)`` holds almost surely;
    normalising ``φ`` only rescales the driving Brownian motion and leaves the
    level at 1. ``horizon`` is in the time scale of ``f`` and ``dt`` is the
    step in the time scale of ``φ``.
    """
    sign = f.sign
    if sign == 0:
        raise DomainError("curve vanishes at t = 0")
    if not 0 < horizon < f.horizon:
        raise DomainError("horizon must lie inside the curve domain")
    g = pi(TransformParams(-1.0, 0.0), f) if sign < 0 else f
    phi = sigma(g)
    spec = GaussMarkovSpec.from_curve(phi)
    phi_horizon = float(tau(g, horizon))
    sim = simulate_gm(spec, n, dt, phi_horizon, seed, level=1.0, bridge=bridge,
                      chunk_size=chunk_size)
    mapped = np.asarray(tau(phi, sim.hit_times)) if sim.hit_times.size else sim.hit_times
    cfg = dict(sim.config, horizon=float(horizon), phi_horizon=phi_horizon)
    return FptSampleSet(mapped, sim.censored_count, sim.n_total, cfg)


# h-transform ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HFactor:
    """Space-time harmonic weight tilting ``P^φ`` into ``P^{Π^{α,β}φ}``."""

    params: TransformParams
    phi: Curve

    def window_end(self) -> float:
        """First time where ``α + βτφ`` vanishes (``inf`` if never)."""
        al, be = self.params.alpha, self.params.beta
        if al <= 0:
            return 0.0
        if be >= 0 or -al / be >= self.phi.tau_total:
            return self.phi.horizon
        return float(rho_tau(self.phi, -al / be))


def h_factor_eval(h: HFactor, t, x):
    """``H_t(x) = (α/(α+βτφ(t)))^{1/2} exp(βx² / (2φ(t)²(α+βτφ(t))))``."""
    al, be = h.params.alpha, h.params.beta
    tt = np.asarray(t, dtype=float)
    xx = np.asarray(x, dtype=float)
    den = al + be * np.asarray(tau(h.phi, tt))
    if np.any(den <= _SAFETY * abs(al)) or al <= 0:
        raise DomainError("Π^{α,β}φ is not positive at the requested time")
    ph = np.asarray(h.phi(tt))
    out = np.sqrt(al / den) * np.exp(be * xx * xx / (2.0 * ph * ph * den))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MartingaleCheck:
    mean: float
    standard_error: float
    target: float

    @property
    def z(self) -> float:
        if self.standard_error == 0:
            return 0.0 if self.mean == self.target else math.inf
        return abs(self.mean - self.target) / self.standard_error

    @property
    def passed(self) -> bool:
        return abs(self.mean - self.target) <= 3.0 * self.standard_error + 1e-15 * abs(self.target)


def martingale_check(h: HFactor, spec: GaussMarkovSpec, t: float, n: int, seed: int) -> MartingaleCheck:
    """Monte Carlo estimate of ``E_x[H_t(X_t)]``, to be compared with ``H_0(x)``."""
    al, be = h.params.alpha, h.params.beta
    tp = float(tau(h.phi, t))
    if al <= 0 or al + be * tp <= _SAFETY * al:
        raise DomainError("t outside the window where Π^{α,β}φ stays positive")
    if be * tp >= al * (1 - _SAFETY):
        raise DomainError("H_t(X_t) has infinite variance at this t; choose an earlier time")
    x = sample_gm(spec, [t], n, seed)[:, 0]
    vals = np.asarray(h_factor_eval(h, np.full(x.size, t), x))
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return MartingaleCheck(float(np.mean(vals)), se, float(h_factor_eval(h, 0.0, spec.x0)))


@dataclass(frozen=True, eq=False)
class HtRelationReport:
    edges: np.ndarray
    weighted: np.ndarray
    direct: np.ndarray
    combined_se: np.ndarray
    max_z: float
    passed: bool


def ht_density_relation_check(params: TransformParams, phi: Curve, y: float, x: float, n: int,
                              seed: int, dt: float = 1e-3, horizon: Optional[float] = None,
                              bins: int = 8) -> HtRelationReport:
    """Compare the reweighted ``P^φ`` hitting law of ``y`` with the ``P^{Πφ}`` law.

    The hitting times under ``φ`` are weighted by ``H_T(y)/H_0(x)`` and binned;
    every bin must agree with the directly simulated ``Π^{α,β}φ`` histogram
    within three combined standard errors.
    """
    h = HFactor(params, phi)
    end = h.window_end()
    if horizon is None:
        horizon = min(end * (1 - 1e-3), 5.0)
    if not horizon < end * (1 - _SAFETY):
        raise DomainError("horizon outside the window where the h-transform is defined")
    base = GaussMarkovSpec(phi, x)
    tilted = GaussMarkovSpec.from_curve(pi(params, phi), x)
    s1 = simulate_gm(base, n, dt, horizon, seed, level=y, stream=2)
    s2 = simulate_gm(tilted, n, dt, horizon, seed, level=y, stream=3)
    w = np.asarray(h_factor_eval(h, s1.hit_times, np.full(s1.hit_times.size, y))) \
        / h_factor_eval(h, 0.0, x)
    edges = np.linspace(0.0, horizon, bins + 1)
    idx1 = np.clip(np.searchsorted(edges, s1.hit_times, side="right") - 1, 0, bins - 1)
    wsum = np.bincount(idx1, weights=w, minlength=bins) / n
    w2 = np.bincount(idx1, weights=w * w, minlength=bins) / n
    var1 = np.maximum(w2 - wsum**2, 0.0) / n
    idx2 = np.clip(np.searchsorted(edges, s2.hit_times, side="right") - 1, 0, bins - 1)
    direct = np.bincount(idx2, minlength=bins) / n
    var2 = direct * (1 - direct) / n
    se = np.sqrt(var1 + var2)
    diff = np.abs(wsum - direct)
    z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff > 1e-15, np.inf, 0.0))
    max_z = float(np.max(z))
    return HtRelationReport(edges, wsum, direct, se, max_z, max_z <= 3.0)
