"""Bessel and Hankel functions needed by the reference solutions.

Implemented from scratch so the solver does not depend on a host special
function library: ascending series for small arguments, Hankel's large
argument expansion beyond ``ASYMPTOTIC_SWITCH``.  Real order nu >= -1/2,
real argument x >= 0 (x > 0 for negative orders), vectorized over x.

Accuracy is limited by double precision near the switch point (about
1e-11 relative there, much better elsewhere); validated against an
arbitrary precision oracle and the Wronskian identity in the tests.
"""

from __future__ import annotations

import math

import numpy as np

ASYMPTOTIC_SWITCH = 12.0
_SERIES_TERMS = 48
_ASYMPTOTIC_TERMS = 20
_EULER_GAMMA = 0.5772156649015328606


def _series_jv(nu: float, x: np.ndarray) -> np.ndarray:
    # J_nu(x) = sum_m (-1)^m (x/2)^(2m+nu) / (m! Gamma(m+nu+1))
    half = 0.5 * x
    t = half * half
    term = np.full_like(x, 1.0 / math.gamma(nu + 1.0))
    acc = term.copy()
    for m in range(1, _SERIES_TERMS):
        term = term * (-t) / (m * (m + nu))
        acc += term
    if nu == 0.0:
        return acc
    with np.errstate(divide="ignore", invalid="ignore"):
        prefac = np.where(half > 0.0, half ** nu, 0.0 if nu > 0 else np.inf)
    return prefac * acc


def _asymptotic_pq(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Hankel expansion coefficients a_m = prod_j (4nu^2-(2j-1)^2) / (m! 8^m):
    # P = a_0 - a_2/x^2 + ..., Q = a_1/x - a_3/x^3 + ...
    mu = 4.0 * nu * nu
    inv = 1.0 / x
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    a = 1.0
    power = np.ones_like(x)
    for m in range(1, _ASYMPTOTIC_TERMS):
        a = a * (mu - (2 * m - 1) ** 2) / (8.0 * m)
        power = power * inv
        contrib = a * power
        if m % 2 == 1:
            Q += contrib if m % 4 == 1 else -contrib
        else:
            P += contrib if m % 4 == 0 else -contrib
    return P, Q


def besselj(nu: float, x) -> np.ndarray:
    """Bessel function of the first kind, real order, x >= 0."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0.0):
        raise ValueError("besselj defined here for x >= 0 only")
    if nu < 0.0 and np.any(x == 0.0):
        raise ValueError("negative order diverges at x = 0")
    out = np.empty_like(x)
    small = x < ASYMPTOTIC_SWITCH
    if np.any(small):
        out[small] = _series_jv(nu, x[small])
    if np.any(~small):
        xl = x[~small]
        P, Q = _asymptotic_pq(nu, xl)
        chi = xl - (0.5 * nu + 0.25) * math.pi
        out[~small] = np.sqrt(2.0 / (math.pi * xl)) * (P * np.cos(chi) - Q * np.sin(chi))
    return out[0] if scalar else out


def _series_y0(x: np.ndarray) -> np.ndarray:
    j0 = _series_jv(0.0, x)
    t = 0.25 * x * x
    term = np.ones_like(x)
    acc = np.zeros_like(x)
    h = 0.0
    for m in range(1, _SERIES_TERMS):
        term = term * t / (m * m)
        h += 1.0 / m
        acc += (term if m % 2 == 1 else -term) * h
    return (2.0 / math.pi) * ((np.log(0.5 * x) + _EULER_GAMMA) * j0 + acc)


def _series_y1(x: np.ndarray) -> np.ndarray:
    # A&S 9.1.11 with n = 1; psi(1) = -gamma, psi(m+1) = -gamma + H_m
    j1 = _series_jv(1.0, x)
    t = 0.25 * x * x
    term = np.ones_like(x)
    acc = (-2.0 * _EULER_GAMMA + 1.0) * term  # m = 0: psi(1) + psi(2)
    h1, h2 = 0.0, 1.0
    for m in range(1, _SERIES_TERMS):
        term = term * (-t) / (m * (m + 1))
        h1 += 1.0 / m
        h2 += 1.0 / (m + 1)
        acc += term * (-2.0 * _EULER_GAMMA + h1 + h2)
    return (2.0 / math.pi) * np.log(0.5 * x) * j1 - (2.0 / (math.pi * x)) \
        - (x / (2.0 * math.pi)) * acc


def _bessely_01(n: int, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    small = x < ASYMPTOTIC_SWITCH
    if np.any(small):
        xs = x[small]
        out[small] = _series_y0(xs) if n == 0 else _series_y1(xs)
    if np.any(~small):
        xl = x[~small]
        P, Q = _asymptotic_pq(float(n), xl)
        chi = xl - (0.5 * n + 0.25) * math.pi
        out[~small] = np.sqrt(2.0 / (math.pi * xl)) * (P * np.sin(chi) + Q * np.cos(chi))
    return out


def bessely(n: int, x) -> np.ndarray:
    """Bessel function of the second kind, integer order 0 or 1, x > 0."""
    if n not in (0, 1):
        raise ValueError("only orders 0 and 1 are provided")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x <= 0.0):
        raise ValueError("bessely requires x > 0")
    out = _bessely_01(n, x)
    return out[0] if scalar else out


def hankel1(n: int, x) -> np.ndarray:
    """Hankel function of the first kind H^(1)_n = J_n + i Y_n, n in {0, 1}."""
    return besselj(float(n), x) + 1j * bessely(n, x)


def besselj_deriv(nu: float, x) -> np.ndarray:
    """d/dx J_nu(x) via J_{nu-1}(x) - (nu/x) J_nu(x), x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(np.atleast_1d(x) <= 0.0):
        raise ValueError("derivative recurrence requires x > 0")
    if nu == 0.0:
        return -besselj(1.0, x)  # recurrence would need J_{-1}
    return besselj(nu - 1.0, x) - (nu / x) * besselj(nu, x)
