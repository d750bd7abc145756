"""Monte Carlo first passage times of Brownian motion through a curve.

Paths are simulated in independent chunks. Every chunk owns a counter-based
random stream (Philox keyed by ``(seed, chunk index)``), so the result depends
only on the seed and the chunk size, never on the number of worker threads.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np
from scipy.interpolate import PchipInterpolator

from .curves import Curve
from .errors import DomainError, ParameterError

DEFAULT_CHUNK = 4096
_BLOCK = 256
# bridge probabilities below e^-37 (~1e-16) are not sampled
_BRIDGE_CUTOFF = 37.0


_default_workers: Optional[int] = None


def set_default_workers(n: Optional[int]) -> None:
    """Worker count used when a call does not ask for one (``None``: CPU count)."""
    global _default_workers
    if n is not None and n < 1:
        raise ParameterError("worker count must be positive")
    _default_workers = n


def worker_count(requested: Optional[int] = None) -> int:
    """Number of worker threads, capped by ``FPT_LAB_THREADS`` when set."""
    if requested is None:
        requested = _default_workers
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("FPT_LAB_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError as exc:
            raise ParameterError(f"FPT_LAB_THREADS must be an integer, got {cap!r}") from exc
    return max(1, n)


@dataclass(frozen=True, eq=False)
class FptSampleSet:
    """Simulated hitting times; paths still alive at the horizon are censored."""

    hit_times: np.ndarray
    censored_count: int
    n_total: int
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hit_times.size + self.censored_count != self.n_total:
            raise ParameterError("hit and censored counts do not add up to n_total")

    @property
    def hit_fraction(self) -> float:
        return self.hit_times.size / self.n_total

    @property
    def hit_fraction_se(self) -> float:
        p = self.hit_fraction
        return math.sqrt(max(p * (1 - p), 0.0) / self.n_total)

    @property
    def horizon(self) -> float:
        return float(self.config.get("horizon", math.inf))

    def to_csv(self, fh: Optional[TextIO] = None) -> str:
        """Single ``hit_time`` column preceded by a ``#`` metadata line."""
        buf = io.StringIO()
        cfg = self.config
        buf.write(f"# n={self.n_total} dt={cfg.get('dt')} seed={cfg.get('seed')} "
                  f"censored={self.censored_count} horizon={cfg.get('horizon')} "
                  f"bridge={int(bool(cfg.get('bridge', True)))}\n")
        buf.write("hit_time\n")
        for x in self.hit_times:
            buf.write(f"{x:.17g}\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "FptSampleSet":
        lines = text.splitlines()
        meta = dict(item.split("=", 1) for item in lines[0].lstrip("# ").split())
        hits = np.array([float(x) for x in lines[2:] if x.strip()])
        cfg = {"dt": float(meta["dt"]), "seed": int(meta["seed"]),
               "horizon": float(meta["horizon"]), "bridge": meta.get("bridge", "1") == "1"}
        return cls(hits, int(meta["censored"]), int(meta["n"]), cfg)


def _chunk_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    key = np.array([seed % 2**64, (stream << 32) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _run_chunk(times, var, barrier, count, rng, bridge) -> np.ndarray:
    """Hitting times (nan when censored) for ``count`` paths of ``W`` against ``barrier``.

    ``W`` starts at 0 and has independent Gaussian increments with variances
    ``var``; a path is absorbed once ``barrier - W <= 0`` at a node, or, with
    the bridge correction, when the Brownian bridge between two nodes crosses.
    """
    nsteps = var.size
    sd = np.sqrt(var)
    thr = 0.5 * _BRIDGE_CUTOFF * var
    out = np.full(count, np.nan)
    alive = np.arange(count)
    w = np.zeros(count)
    dprev = np.full(count, barrier[0])
    for s0 in range(0, nsteps, _BLOCK):
        s1 = min(nsteps, s0 + _BLOCK)
        z = rng.standard_normal((alive.size, s1 - s0))
        z *= sd[s0:s1]
        np.cumsum(z, axis=1, out=z)
        z += w[:, None]
        d = barrier[s0 + 1:s1 + 1] - z
        ev = d <= 0
        if bridge:
            prod = np.empty_like(d)
            prod[:, 0] = dprev * d[:, 0]
            np.multiply(d[:, 1:], d[:, :-1], out=prod[:, 1:])
            cand = (prod < thr[s0:s1]) & ~ev
            rows, cols = np.nonzero(cand)
            if rows.size:
                pr = np.exp(-2.0 * prod[rows, cols] / var[s0 + cols])
                ev[rows, cols] = rng.random(rows.size) < pr
        has = ev.any(axis=1)
        if np.any(has):
            r = np.nonzero(has)[0]
            j = ev[r].argmax(axis=1)
            a = np.where(j == 0, dprev[r], d[r, np.maximum(j - 1, 0)])
            b = d[r, j]
            frac = np.where(b <= 0, a / (a - b), a / (a + b))
            k = s0 + j
            out[alive[r]] = times[k] + (times[k + 1] - times[k]) * frac
            keep = ~has
            alive = alive[keep]
            w = z[keep, -1]
            dprev = d[keep, -1]
        else:
            w = z[:, -1]
            dprev = d[:, -1]
        if alive.size == 0:
            break
    return out


def first_passage(times: np.ndarray, clock: np.ndarray, barrier: np.ndarray, n: int, seed: int,
                  bridge: bool = True, chunk_size: int = DEFAULT_CHUNK,
                  workers: Optional[int] = None, stream: int = 0) -> tuple[np.ndarray, int]:
    """Shared simulation core: first time ``W`` (variance clock ``clock``) meets ``barrier``.

    ``times``, ``clock`` and ``barrier`` are given on the same nodes, with
    ``clock[0] = 0`` and ``barrier[0] > 0``. Returns the hitting times in path
    order and the number of censored paths.
    """
    times = np.asarray(times, dtype=float)
    var = np.diff(np.asarray(clock, dtype=float))
    barrier = np.asarray(barrier, dtype=float)
    if barrier[0] <= 0:
        raise DomainError("the barrier must start above the process")
    if np.any(var < 0):
        raise ParameterError("variance clock must be non-decreasing")
    sizes = [min(chunk_size, n - s) for s in range(0, n, chunk_size)]

    def job(i):
        return _run_chunk(times, var, barrier, sizes[i], _chunk_rng(seed, stream, i), bridge)

    nw = min(worker_count(workers), len(sizes))
    if nw == 1:
        parts = [job(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    res = np.concatenate(parts) if parts else np.empty(0)
    hits = res[~np.isnan(res)]
    return hits, int(n - hits.size)


def time_grid(horizon: float, dt: float) -> np.ndarray:
    """Uniform grid on ``[0, horizon]`` with step at most ``dt``."""
    if not (dt > 0 and math.isfinite(dt)):
        raise ParameterError("dt must be positive")
    if not (horizon > 0 and math.isfinite(horizon)):
        raise ParameterError("horizon must be positive and finite")
    if dt > horizon / 100 * (1 + 1e-12):
        raise ParameterError("dt must not exceed horizon/100")
    steps = int(math.ceil(horizon / dt * (1 - 1e-12)))
    return np.linspace(0.0, horizon, steps + 1)


def simulate_fpt(curve: Curve, n: int, dt: float, horizon: float, seed: int,
                 bridge: bool = True, chunk_size: int = DEFAULT_CHUNK,
                 workers: Optional[int] = None) -> FptSampleSet:
    """Simulate ``n`` first passage times of Brownian motion through ``curve``.

    Negative curves are handled through the symmetry ``B -> -B``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError("n must be a positive integer")
    if chunk_size < 1:
        raise ParameterError("chunk_size must be positive")
    times = time_grid(horizon, dt)
    if horizon >= curve.horizon:
        raise DomainError(f"horizon {horizon} not inside the curve domain [0, {curve.horizon})")
    barrier = curve(times) * curve.sign
    if curve.sign == 0:
        raise DomainError("curve vanishes at t = 0")
    hits, censored = first_passage(times, times, barrier, int(n), seed, bridge, chunk_size, workers)
    cfg = {"dt": float(times[1] - times[0]), "horizon": float(horizon), "seed": int(seed),
           "bridge": bool(bridge), "chunk_size": int(chunk_size)}
    return FptSampleSet(hits, censored, int(n), cfg)


# Kolmogorov-Smirnov distance --------------------------------------------------

_KS_GRID = 4097


def _is_samples(obj) -> bool:
    return isinstance(obj, FptSampleSet)


def ks_distance(s1, s2, window: tuple[float, float]) -> float:
    """Sup distance between sub-distribution increments on ``window``.

    Each argument is an :class:`FptSampleSet` or a density. Both are compared
    through ``F(t) - F(t0)`` for ``t`` in ``[t0, t1]``, where ``F`` counts hits
    among all paths (censored ones included), so defective laws compare fairly.
    """
    t0, t1 = float(window[0]), float(window[1])
    if not t1 > t0 or t0 < 0:
        raise ParameterError("empty or invalid KS window")
    for s in (s1, s2):
        if _is_samples(s) and t1 > s.horizon * (1 + 1e-12):
            raise DomainError("KS window extends beyond the simulation horizon")
    pts = [np.linspace(t0, t1, _KS_GRID)]
    for s in (s1, s2):
        if _is_samples(s):
            h = s.hit_times
            pts.append(h[(h > t0) & (h <= t1)])
    pts = np.unique(np.concatenate(pts))
    right = [_increments(s, pts, t0, False) for s in (s1, s2)]
    left = [_increments(s, pts, t0, True) for s in (s1, s2)]
    return float(max(np.max(np.abs(right[0] - right[1])), np.max(np.abs(left[0] - left[1]))))


def _increments(obj, pts: np.ndarray, t0: float, left: bool) -> np.ndarray:
    if _is_samples(obj):
        h = np.sort(obj.hit_times)
        base = np.searchsorted(h, t0, side="right")
        idx = np.searchsorted(h, pts, side="left" if left else "right")
        return (idx - base) / obj.n_total
    grid = np.linspace(pts[0], pts[-1], _KS_GRID)
    vals = obj.cdf(grid) - obj.cdf(t0) if hasattr(obj, "cdf") else None
    if vals is None:
        raise ParameterError("KS arguments must be sample sets or densities")
    return PchipInterpolator(grid, vals)(pts)
