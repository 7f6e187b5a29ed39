"""Hot numeric kernels.

Each kernel exists twice: a loop version compiled with numba (``*_nb``) and a
vectorised numpy version (``*_np``).  The unsuffixed name is bound to one of
them according to :data:`covtest._accel.USE_NUMBA`.  Both versions take
plain arrays and scalars only, so models are passed as
``(kind, B, a, knots, vals)`` with the integer kind codes below.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

KIND_EXP = 0
KIND_SQEXP = 1
KIND_TABLE = 2


# ---------------------------------------------------------------------------
# covariance evaluation


@njit(cache=True)
def _rho_scalar(kind, B, a, knots, vals, tau):
    t = abs(tau)
    if kind == KIND_EXP:
        return B * math.exp(-a * t)
    if kind == KIND_SQEXP:
        return B * math.exp(-a * t * t)
    n = knots.shape[0]
    if t > knots[n - 1]:
        return 0.0
    if n == 1:
        return vals[0]
    j = np.searchsorted(knots, t, side="right") - 1
    if j >= n - 1:
        return vals[n - 1]
    w = (t - knots[j]) / (knots[j + 1] - knots[j])
    return vals[j] + (vals[j + 1] - vals[j]) * w


@njit(cache=True)
def rho_values_nb(kind, B, a, knots, vals, tau):
    out = np.empty(tau.shape[0])
    for i in range(tau.shape[0]):
        out[i] = _rho_scalar(kind, B, a, knots, vals, tau[i])
    return out


def rho_values_np(kind, B, a, knots, vals, tau):
    t = np.abs(np.asarray(tau, dtype=float))
    if kind == KIND_EXP:
        return B * np.exp(-a * t)
    if kind == KIND_SQEXP:
        return B * np.exp(-a * t * t)
    out = np.interp(t, knots, vals)
    out[t > knots[-1]] = 0.0
    return out


# ---------------------------------------------------------------------------
# psi(T, tau) by composite Simpson on the inner integral


def simpson_weights(n, h):
    """Weights of composite Simpson with ``n`` (even) subintervals of width ``h``."""
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


@njit(cache=True)
def _simpson_segment_nb(kind, B, a, knots, vals, T, tau, lo, hi, n):
    if hi <= lo:
        return 0.0
    h = (hi - lo) / n
    acc = 0.0
    for k in range(n + 1):
        u = lo + k * h
        if k == 0 or k == n:
            c = 1.0
        elif k % 2 == 1:
            c = 4.0
        else:
            c = 2.0
        r0 = _rho_scalar(kind, B, a, knots, vals, u)
        rp = _rho_scalar(kind, B, a, knots, vals, u + tau)
        rm = _rho_scalar(kind, B, a, knots, vals, u - tau)
        acc += c * (T - u) * (r0 * r0 + rp * rm)
    return acc * h / 3.0


@njit(cache=True)
def psi_simpson_nb(kind, B, a, knots, vals, T, taus, n):
    out = np.empty(taus.shape[0])
    for i in range(taus.shape[0]):
        tau = taus[i]
        # the cross term has a kink at u = tau when rho has one at 0
        brk = min(tau, T)
        s = _simpson_segment_nb(kind, B, a, knots, vals, T, tau, 0.0, brk, n)
        s += _simpson_segment_nb(kind, B, a, knots, vals, T, tau, brk, T, n)
        out[i] = 2.0 * s / (T * T)
    return out


def _simpson_segment_np(kind, B, a, knots, vals, T, taus, lo, hi, n):
    width = hi - lo
    frac = np.linspace(0.0, 1.0, n + 1)
    u = lo[:, None] + width[:, None] * frac[None, :]
    tt = taus[:, None]
    r0 = rho_values_np(kind, B, a, knots, vals, u)
    rp = rho_values_np(kind, B, a, knots, vals, u + tt)
    rm = rho_values_np(kind, B, a, knots, vals, u - tt)
    f = (T - u) * (r0 * r0 + rp * rm)
    return (f @ simpson_weights(n, 1.0)) * (width / n)


def psi_simpson_np(kind, B, a, knots, vals, T, taus, n):
    taus = np.asarray(taus, dtype=float)
    brk = np.minimum(taus, T)
    zero = np.zeros_like(taus)
    s = _simpson_segment_np(kind, B, a, knots, vals, T, taus, zero, brk, n)
    s += _simpson_segment_np(kind, B, a, knots, vals, T, taus, brk, zero + T, n)
    return 2.0 * s / (T * T)


# ---------------------------------------------------------------------------
# correlogram of a batch of paths (trapezoid rule in t)


@njit(cache=True)
def correlogram_batch_nb(X, n_T, n_lags, dt, T):
    R = X.shape[0]
    out = np.empty((R, n_lags))
    for r in range(R):
        for k in range(n_lags):
            acc = 0.5 * (X[r, k] * X[r, 0] + X[r, n_T + k] * X[r, n_T])
            for i in range(1, n_T):
                acc += X[r, i + k] * X[r, i]
            out[r, k] = acc * dt / T
    return out


def correlogram_batch_np(X, n_T, n_lags, dt, T):
    X = np.asarray(X, dtype=float)
    w = np.ones(n_T + 1)
    w[0] = w[-1] = 0.5
    base = X[:, : n_T + 1] * w
    out = np.empty((X.shape[0], n_lags))
    for k in range(n_lags):
        out[:, k] = np.einsum("ri,ri->r", base, X[:, k : k + n_T + 1])
    return out * (dt / T)


# ---------------------------------------------------------------------------
# L_p deviation on a lag grid (trapezoid rule in tau)


@njit(cache=True)
def lp_trapezoid_nb(dev, dt, p):
    R, M1 = dev.shape
    out = np.empty(R)
    for r in range(R):
        acc = 0.5 * (abs(dev[r, 0]) ** p + abs(dev[r, M1 - 1]) ** p)
        for k in range(1, M1 - 1):
            acc += abs(dev[r, k]) ** p
        out[r] = acc * dt
    return out


def lp_trapezoid_np(dev, dt, p):
    v = np.abs(np.asarray(dev, dtype=float)) ** p
    return (v.sum(axis=1) - 0.5 * (v[:, 0] + v[:, -1])) * dt


if USE_NUMBA:
    rho_values = rho_values_nb
    psi_simpson = psi_simpson_nb
    correlogram_batch = correlogram_batch_nb
    lp_trapezoid = lp_trapezoid_nb
else:
    rho_values = rho_values_np
    psi_simpson = psi_simpson_np
    correlogram_batch = correlogram_batch_np
    lp_trapezoid = lp_trapezoid_np
