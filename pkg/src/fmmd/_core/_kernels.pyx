# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see ``_fallback.py`` for the reference."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def weighted_sq_dists(A, B, w):
    cdef const double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], d = a.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    diff = a[i, k] - b[j, k]
                    acc = acc + ww[k] * diff * diff
                o[i, j] = acc
    return out


cdef inline double _u_stat(const double[:, ::1] K, const cnp.intp_t[::1] p,
                           Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef cnp.intp_t xi, yi, xj, yj
    cdef double acc = 0.0
    for i in range(n):
        xi = p[i]
        yi = p[n + i]
        for j in range(n):
            if j == i:
                continue
            xj = p[j]
            yj = p[n + j]
            acc = acc + ((K[xi, xj] - K[xi, yj]) + (K[yi, yj] - K[xj, yi]))
    return acc / (n * (n - 1))


def u_statistic(Kxx, Kyy, Kxy):
    cdef const double[:, ::1] kxx = np.ascontiguousarray(Kxx, dtype=np.float64)
    cdef const double[:, ::1] kyy = np.ascontiguousarray(Kyy, dtype=np.float64)
    cdef const double[:, ::1] kxy = np.ascontiguousarray(Kxy, dtype=np.float64)
    cdef Py_ssize_t n = kxx.shape[0], i, j
    cdef double acc = 0.0
    with nogil:
        for i in range(n):
            for j in range(n):
                if j != i:
                    acc = acc + ((kxx[i, j] - kxy[i, j]) + (kyy[i, j] - kxy[j, i]))
    return acc / (n * (n - 1))


def permuted_u_statistics(K, perms):
    cdef const double[:, ::1] k = np.ascontiguousarray(K, dtype=np.float64)
    cdef const cnp.intp_t[:, ::1] P = np.ascontiguousarray(perms, dtype=np.intp)
    cdef Py_ssize_t B = P.shape[0], n = P.shape[1] // 2, r
    out = np.empty(B, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for r in range(B):
            o[r] = _u_stat(k, P[r], n)
    return out
