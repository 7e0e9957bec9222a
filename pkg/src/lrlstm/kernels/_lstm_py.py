"""Pure-numpy LSTM recurrences (fallback when the compiled extension is absent)."""

import numpy as np


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def forward_recurrence(XW, U, reverse):
    n, d4 = XW.shape
    d = d4 // 4
    H = np.zeros((n, d))
    C = np.zeros((n, d))
    G = np.empty((n, d4))
    h = np.zeros(d)
    c = np.zeros(d)
    steps = range(n - 1, -1, -1) if reverse else range(n)
    for t in steps:
        z = XW[t] + U @ h
        sig = _sigmoid(z[: 3 * d])
        g = np.tanh(z[3 * d:])
        i, f, o = sig[:d], sig[d: 2 * d], sig[2 * d:]
        c = f * c + i * g
        h = o * np.tanh(c)
        H[t] = h
        C[t] = c
        G[t, : 3 * d] = sig
        G[t, 3 * d:] = g
    return H, C, G


def backward_recurrence(dH, U, C, G, reverse):
    n, d = dH.shape
    dZ = np.empty((n, 4 * d))
    dh_next = np.zeros(d)
    dc_next = np.zeros(d)
    # walk the processing order backwards
    steps = range(n) if reverse else range(n - 1, -1, -1)
    for t in steps:
        prev = t + 1 if reverse else t - 1
        c_prev = C[prev] if 0 <= prev < n else np.zeros(d)
        i, f, o, g = G[t, :d], G[t, d: 2 * d], G[t, 2 * d: 3 * d], G[t, 3 * d:]
        tc = np.tanh(C[t])
        dh = dH[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = dZ[t]
        dz[:d] = dc * g * i * (1.0 - i)
        dz[d: 2 * d] = dc * c_prev * f * (1.0 - f)
        dz[2 * d: 3 * d] = dh * tc * o * (1.0 - o)
        dz[3 * d:] = dc * i * (1.0 - g * g)
        dc_next = dc * f
        dh_next = U.T @ dz
    return dZ
