"""Compiled scalar physics and fixed-step RK4 drivers.

Every device equation lives here exactly once. The public modules call these
functions both for single-step APIs and for long waveform runs, so the two
paths share bits.

Run kernels consume a flattened work list: interval ``i`` lasts
``lengths[i]`` seconds at a constant drive, and if ``rec[i] >= 0`` the state
at the end of the interval is stored at ``out[rec[i]]``. Each kernel returns
the index of the first interval after which the state left its admissible
set, or -1.
"""

import math

import numpy as np
from numba import njit

_STEP_SLACK = 1e-9


@njit(cache=True, inline="always")
def _substeps(length, dt):
    m = int(math.floor(length / dt + _STEP_SLACK))
    rem = length - m * dt
    if rem < _STEP_SLACK * dt:
        rem = 0.0
    return m, rem


# --- memcapacitor ---------------------------------------------------------

@njit(cache=True)
def memcap_rhs(R, W, v2, K, R0, W0, k_ew, k_ec, z_ew, z_ec):
    dR = (K / (2.0 * W) * v2 - k_ew * (R - R0)) / z_ew
    dW = (-K * math.pi * R * R / (2.0 * W * W) * v2 + k_ec * (W0 - W)) / z_ec
    return dR, dW


@njit(cache=True)
def memcap_rk4(R, W, h, v2, K, R0, W0, k_ew, k_ec, z_ew, z_ec):
    a1, b1 = memcap_rhs(R, W, v2, K, R0, W0, k_ew, k_ec, z_ew, z_ec)
    a2, b2 = memcap_rhs(R + 0.5 * h * a1, W + 0.5 * h * b1, v2, K, R0, W0, k_ew, k_ec, z_ew, z_ec)
    a3, b3 = memcap_rhs(R + 0.5 * h * a2, W + 0.5 * h * b2, v2, K, R0, W0, k_ew, k_ec, z_ew, z_ec)
    a4, b4 = memcap_rhs(R + h * a3, W + h * b3, v2, K, R0, W0, k_ew, k_ec, z_ew, z_ec)
    R = R + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    W = W + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    return R, W


@njit(cache=True, nogil=True)
def run_memcap(R, W, lengths, vm, z_ew, z_ec, rec, K, R0, W0, k_ew, k_ec, dt, W_max,
               out_R, out_W):
    for i in range(lengths.shape[0]):
        v2 = vm[i] * vm[i]
        m, rem = _substeps(lengths[i], dt)
        for _ in range(m):
            R, W = memcap_rk4(R, W, dt, v2, K, R0, W0, k_ew, k_ec, z_ew[i], z_ec[i])
        if rem > 0.0:
            R, W = memcap_rk4(R, W, rem, v2, K, R0, W0, k_ew, k_ec, z_ew[i], z_ec[i])
        if not (R > 0.0 and W > 0.0 and W <= W_max and math.isfinite(R) and math.isfinite(W)):
            return i, R, W
        if rec[i] >= 0:
            out_R[rec[i]] = R
            out_W[rec[i]] = W
    return -1, R, W


# --- Du memristor ---------------------------------------------------------

@njit(cache=True)
def du_rate(w, v, lam, eta, tau):
    return lam * math.sinh(eta * v) - w / tau


@njit(cache=True)
def du_rk4(w, h, v, lam, eta, tau):
    k1 = du_rate(w, v, lam, eta, tau)
    k2 = du_rate(w + 0.5 * h * k1, v, lam, eta, tau)
    k3 = du_rate(w + 0.5 * h * k2, v, lam, eta, tau)
    k4 = du_rate(w + h * k3, v, lam, eta, tau)
    w = w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return min(max(w, 0.0), 1.0)


@njit(cache=True)
def du_current(w, v, alpha, beta, gamma, delta):
    return (1.0 - w) * alpha * (1.0 - math.exp(-beta * v)) + w * gamma * math.sinh(delta * abs(v))


@njit(cache=True)
def du_conductance(w, v, alpha, beta, gamma, delta, v_guard):
    if abs(v) < v_guard:
        return (1.0 - w) * alpha * beta + w * gamma * delta
    return du_current(w, v, alpha, beta, gamma, delta) / v


@njit(cache=True, nogil=True)
def run_du(w, lengths, levels, rec, lam, eta, tau, dt, out_w):
    for i in range(lengths.shape[0]):
        v = levels[i]
        m, rem = _substeps(lengths[i], dt)
        for _ in range(m):
            w = du_rk4(w, dt, v, lam, eta, tau)
        if rem > 0.0:
            w = du_rk4(w, rem, v, lam, eta, tau)
        if not math.isfinite(w):
            return i, w
        if rec[i] >= 0:
            out_w[rec[i]] = w
    return -1, w


# --- Armendarez memristor -------------------------------------------------

@njit(cache=True)
def arm_rate(N, v, tau0, v_tau, N0, v_e):
    av = abs(v)
    return (N0 * math.exp(av / v_e) - N) / (tau0 * math.exp(av / v_tau))


@njit(cache=True)
def arm_rk4(N, h, v, tau0, v_tau, N0, v_e):
    k1 = arm_rate(N, v, tau0, v_tau, N0, v_e)
    k2 = arm_rate(N + 0.5 * h * k1, v, tau0, v_tau, N0, v_e)
    k3 = arm_rate(N + 0.5 * h * k2, v, tau0, v_tau, N0, v_e)
    k4 = arm_rate(N + h * k3, v, tau0, v_tau, N0, v_e)
    return N + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True, nogil=True)
def run_arm(N, lengths, levels, rec, tau0, v_tau, N0, v_e, dt, out_N):
    for i in range(lengths.shape[0]):
        v = levels[i]
        m, rem = _substeps(lengths[i], dt)
        for _ in range(m):
            N = arm_rk4(N, dt, v, tau0, v_tau, N0, v_e)
        if rem > 0.0:
            N = arm_rk4(N, rem, v, tau0, v_tau, N0, v_e)
        if not (N > 0.0 and math.isfinite(N)):
            return i, N
        if rec[i] >= 0:
            out_N[rec[i]] = N
    return -1, N


@njit(cache=True)
def du_observables(w, v, alpha, beta, gamma, delta, v_guard):
    n = w.shape[0]
    cur = np.empty(n)
    cond = np.empty(n)
    for i in range(n):
        cur[i] = du_current(w[i], v[i], alpha, beta, gamma, delta)
        cond[i] = du_conductance(w[i], v[i], alpha, beta, gamma, delta, v_guard)
    return cur, cond
