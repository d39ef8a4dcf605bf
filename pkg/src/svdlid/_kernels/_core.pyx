# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Semantics must match ``_fallback.py`` exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def skipgram_counts(const cnp.int64_t[::1] seq, Py_ssize_t k, Py_ssize_t m):
    cdef Py_ssize_t t, n = seq.shape[0]
    counts = np.zeros((m, m), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] c = counts
    for t in range(k, n):
        c[seq[t - k], seq[t]] += 1
    return counts


def markov_walk(const double[:, ::1] cum, const double[::1] u, Py_ssize_t start):
    cdef Py_ssize_t n = u.shape[0], m = cum.shape[1]
    cdef Py_ssize_t t, j, s = start
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    if n == 0:
        return out
    o[0] = s
    for t in range(1, n):
        j = 0
        while j < m - 1 and cum[s, j] <= u[t]:
            j += 1
        s = j
        o[t] = s
    return out


def smo(const double[:, ::1] K, const double[::1] y, double C, double tol,
        Py_ssize_t max_iter):
    cdef Py_ssize_t n = y.shape[0]
    alpha_arr = np.zeros(n, dtype=np.float64)
    grad_arr = -np.ones(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = grad_arr
    cdef Py_ssize_t it = 0, t, i, j
    cdef double gmax, gmin, v, b, a, obj, best
    cdef double quad, delta, diff, total, old_ai, old_aj, dai, daj
    cdef double tau = 1e-12

    while it < max_iter:
        # maximal violating index i over I_up
        gmax = -INFINITY
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        # second-order choice of j over I_low
        gmin = INFINITY
        j = -1
        best = INFINITY
        for t in range(n):
            if (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0):
                v = -y[t] * G[t]
                if v < gmin:
                    gmin = v
                if i >= 0:
                    b = gmax - v
                    if b > 0:
                        a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if a <= 0:
                            a = tau
                        obj = -(b * b) / a
                        if obj < best:
                            best = obj
                            j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            break
        it += 1

        old_ai = alpha[i]
        old_aj = alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = tau
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0
                    alpha[j] = total

        dai = (alpha[i] - old_ai) * y[i]
        daj = (alpha[j] - old_aj) * y[j]
        for t in range(n):
            G[t] += y[t] * (K[i, t] * dai + K[j, t] * daj)

    return alpha_arr, grad_arr, it
