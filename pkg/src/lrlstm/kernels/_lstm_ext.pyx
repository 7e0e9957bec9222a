# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM recurrences. Same contract as ``_lstm_py``."""

import numpy as np
from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport dgemv


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def forward_recurrence(const double[:, ::1] XW, const double[:, ::1] U, bint reverse):
    cdef int n = XW.shape[0]
    cdef int d4 = XW.shape[1]
    cdef int d = d4 // 4
    H_arr = np.zeros((n, d))
    C_arr = np.zeros((n, d))
    G_arr = np.empty((n, d4))
    h_arr = np.zeros(d)
    z_arr = np.empty(d4)
    cdef double[:, ::1] H = H_arr
    cdef double[:, ::1] C = C_arr
    cdef double[:, ::1] G = G_arr
    cdef double[::1] h = h_arr
    cdef double[::1] z = z_arr
    cdef int s, t, k, prev
    cdef int inc = 1
    cdef double one = 1.0
    cdef double c_prev, gi, gf, go, gg, c
    cdef char trans = b'T'
    with nogil:
        for s in range(n):
            t = n - 1 - s if reverse else s
            prev = t + 1 if reverse else t - 1
            for k in range(d4):
                z[k] = XW[t, k]
            if s > 0:
                # row-major U is column-major U^T, so 'T' gives z += U h
                dgemv(&trans, &d, &d4, &one, <double *> &U[0, 0], &d, &h[0], &inc, &one, &z[0], &inc)
            for k in range(d):
                gi = _sigmoid(z[k])
                gf = _sigmoid(z[d + k])
                go = _sigmoid(z[2 * d + k])
                gg = tanh(z[3 * d + k])
                c_prev = C[prev, k] if s > 0 else 0.0
                c = gf * c_prev + gi * gg
                C[t, k] = c
                H[t, k] = go * tanh(c)
                h[k] = H[t, k]
                G[t, k] = gi
                G[t, d + k] = gf
                G[t, 2 * d + k] = go
                G[t, 3 * d + k] = gg
    return H_arr, C_arr, G_arr


def backward_recurrence(const double[:, ::1] dH, const double[:, ::1] U,
                        const double[:, ::1] C, const double[:, ::1] G, bint reverse):
    cdef int n = dH.shape[0]
    cdef int d = dH.shape[1]
    cdef int d4 = 4 * d
    dZ_arr = np.empty((n, d4))
    dh_next_arr = np.zeros(d)
    dc_next_arr = np.zeros(d)
    cdef double[:, ::1] dZ = dZ_arr
    cdef double[::1] dh_next = dh_next_arr
    cdef double[::1] dc_next = dc_next_arr
    cdef int s, t, k, prev
    cdef int inc = 1
    cdef double one = 1.0
    cdef double zero = 0.0
    cdef double gi, gf, go, gg, tc, dh, dc, c_prev
    cdef char trans = b'N'
    with nogil:
        for s in range(n):
            t = s if reverse else n - 1 - s
            prev = t + 1 if reverse else t - 1
            for k in range(d):
                gi = G[t, k]
                gf = G[t, d + k]
                go = G[t, 2 * d + k]
                gg = G[t, 3 * d + k]
                tc = tanh(C[t, k])
                c_prev = C[prev, k] if 0 <= prev < n else 0.0
                dh = dH[t, k] + dh_next[k]
                dc = dc_next[k] + dh * go * (1.0 - tc * tc)
                dZ[t, k] = dc * gg * gi * (1.0 - gi)
                dZ[t, d + k] = dc * c_prev * gf * (1.0 - gf)
                dZ[t, 2 * d + k] = dh * tc * go * (1.0 - go)
                dZ[t, 3 * d + k] = dc * gi * (1.0 - gg * gg)
                dc_next[k] = dc * gf
            # dh_next = U^T dz; column-major view of U is U^T (d x 4d), so 'N'
            dgemv(&trans, &d, &d4, &one, <double *> &U[0, 0], &d, &dZ[t, 0], &inc, &zero, &dh_next[0], &inc)
    return dZ_arr
