"""Airy function ``Ai``, its derivative and its zeros.

For ``|x| <= 8`` the Maclaurin series is summed in extended precision
(``decimal``), which avoids the cancellation that ruins the series in double
precision for positive ``x``. Beyond that the standard asymptotic expansions
are used, truncated at their smallest term.
"""

from __future__ import annotations

import math
import warnings
from decimal import Decimal, localcontext
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericError

SERIES_LIMIT = 8.0
RANGE_LIMIT = 120.0
_PREC = 60

_AI0 = "0.355028053887817239260063186004183176397979174"
_AIP0 = "-0.258819403792806798405183560189203963479091138"


def _series(x: float) -> tuple[float, float]:
    with localcontext() as ctx:
        ctx.prec = _PREC
        X = Decimal(x)
        x3 = X * X * X
        tol = Decimal(10) ** (-_PREC + 5)
        # f = Σ a_k x^{3k}, g = Σ b_k x^{3k+1}; Ai = Ai(0) f + Ai'(0) g
        a = Decimal(1)
        b = X
        f, g = a, b
        df = Decimal(0)
        dg = Decimal(1)
        k = 0
        while True:
            k += 1
            a = a * x3 / ((3 * k - 1) * (3 * k))
            b = b * x3 / ((3 * k) * (3 * k + 1))
            f += a
            g += b
            if X != 0:
                df += 3 * k * a / X
            dg += (3 * k + 1) * b / X if X != 0 else 0
            if abs(a) + abs(b) <= tol * (abs(f) + abs(g)) and k > 2:
                break
            if k > 500:  # pragma: no cover - cannot happen for |x| <= 8
                raise NumericError("Airy series failed to converge")
        c1, c2 = Decimal(_AI0), Decimal(_AIP0)
        return float(c1 * f + c2 * g), float(c1 * df + c2 * dg)


@lru_cache(maxsize=None)
def _u_coeffs(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, n)]
    return tuple(u), tuple(v)


def _asym_sum(coef, z: float, alternate: bool, start: int = 0, stride: int = 1) -> float:
    """Sum ``Σ (±1)^j c_{start+stride j} z^{-(start+stride j)}`` up to the smallest term."""
    total = 0.0
    prev = math.inf
    j = 0
    while True:
        k = start + stride * j
        if k >= len(coef):
            break
        term = coef[k] * z ** (-k)
        if alternate and j % 2:
            term = -term
        if abs(term) > prev:
            break
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
        prev = abs(term)
        j += 1
    return total


def _asymptotic(x: float) -> tuple[float, float]:
    u, v = _u_coeffs(40)
    if x > 0:
        zeta = 2.0 / 3.0 * x**1.5
        q = x**0.25
        e = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
        return (e / q * _asym_sum(u, zeta, True), -e * q * _asym_sum(v, zeta, True))
    z = -x
    zeta = 2.0 / 3.0 * z**1.5
    q = z**0.25
    c, s = math.cos(zeta - math.pi / 4), math.sin(zeta - math.pi / 4)
    pu = _asym_sum(u, zeta, True, 0, 2)
    qu = _asym_sum(u, zeta, True, 1, 2)
    pv = _asym_sum(v, zeta, True, 0, 2)
    qv = _asym_sum(v, zeta, True, 1, 2)
    rp = math.sqrt(math.pi)
    ai = (c * pu + s * qu) / (rp * q)
    aip = q / rp * (s * pv - c * qv)
    return ai, aip


def _airy_scalar(x: float) -> tuple[float, float]:
    if math.isnan(x):
        return math.nan, math.nan
    if abs(x) > RANGE_LIMIT:
        warnings.warn(f"Airy argument {x} outside the validated range |x| <= {RANGE_LIMIT}",
                      RuntimeWarning, stacklevel=3)
    if abs(x) <= SERIES_LIMIT:
        return _series(x)
    return _asymptotic(x)


def airy(x):
    """Return ``(Ai(x), Ai'(x))`` for a scalar or array ``x``."""
    arr = np.asarray(x, dtype=float)
    flat = arr.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    for i, xi in enumerate(flat):
        ai[i], aip[i] = _airy_scalar(float(xi))
    if arr.ndim == 0:
        return float(ai[0]), float(aip[0])
    return ai.reshape(arr.shape), aip.reshape(arr.shape)


def airy_ai(x):
    return airy(x)[0]


def airy_ai_prime(x):
    return airy(x)[1]


@lru_cache(maxsize=8)
def _zeros_cached(n: int) -> tuple[np.ndarray, np.ndarray]:
    zs = np.empty(n)
    ders = np.empty(n)
    for k in range(n):
        t = 3.0 * math.pi * (4 * k + 3) / 8.0
        z = -(t ** (2.0 / 3.0)) * (1 + 5.0 / 48.0 / t**2)
        for _ in range(50):
            ai, aip = _airy_scalar(z)
            step = ai / aip
            z -= step
            if abs(step) <= 1e-15 * abs(z):
                break
        else:  # pragma: no cover - Newton converges from the asymptotic guess
            raise NumericError(f"Airy zero {k + 1} did not converge")
        zs[k] = z
        ders[k] = _airy_scalar(z)[1]
    zs.flags.writeable = False
    ders.flags.writeable = False
    return zs, ders


def airy_zeros(n: int) -> np.ndarray:
    """The first ``n`` zeros of ``Ai`` (all negative), ``1 <= n <= 200``."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 200:
        raise DomainError("number of Airy zeros must be an integer in [1, 200]")
    return _zeros_cached(int(n))[0]


def airy_zeros_with_derivatives(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Zeros ``z_k`` of ``Ai`` together with ``Ai'(z_k)``."""
    airy_zeros(n)
    return _zeros_cached(int(n))
