# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same signatures and semantics as ``_fallback``.

All loops run without the GIL so callers may split work across threads.
"""
import numpy as np

from libc.math cimport copysign, fabs, floor, fmax, fmin
from libc.stdlib cimport malloc, free

NAME = "cython"


cdef inline void _level_table(const double* x, Py_ssize_t d, Py_ssize_t ell,
                              double* w) noexcept nogil:
    # w[t*(ell+1) + k] = prod_{r<k} (ell*lambda_t - r) / k!
    cdef Py_ssize_t t, k
    cdef double lam, acc, s = 0.0
    for t in range(d):
        s += x[t]
    for t in range(d + 1):
        if t == 0:
            lam = ell * (1.0 - s)
        else:
            lam = ell * x[t - 1]
        acc = 1.0
        w[t * (ell + 1)] = 1.0
        for k in range(1, ell + 1):
            acc = acc * (lam - (k - 1)) / k
            w[t * (ell + 1) + k] = acc


def lattice_basis(const long long[:, ::1] nodes, Py_ssize_t ell, x):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t q = xv.shape[0], d = xv.shape[1], M = nodes.shape[0]
    cdef Py_ssize_t i, k, t, stride = ell + 1
    out = np.empty((q, M), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef double prod
    cdef double* w = <double*> malloc((d + 1) * stride * sizeof(double))
    if w == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(q):
                _level_table(&xv[i, 0], d, ell, w)
                for k in range(M):
                    prod = 1.0
                    for t in range(d + 1):
                        prod = prod * w[t * stride + nodes[k, t]]
                    ov[i, k] = prod
    finally:
        free(w)
    return out


def piecewise_query(const double[:, ::1] values, Py_ssize_t m, Py_ssize_t ell,
                    const long long[:, ::1] nodes, y):
    cdef const double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t q = yv.shape[0], d = yv.shape[1], M = nodes.shape[0]
    cdef Py_ssize_t i, k, t, a, j, flat, stride = ell + 1
    out = np.empty(q, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double acc, prod, scaled
    cdef double* w = <double*> malloc(((d + 1) * stride + d) * sizeof(double))
    if w == NULL:
        raise MemoryError()
    cdef double* local = w + (d + 1) * stride
    try:
        with nogil:
            for i in range(q):
                flat = 0
                for a in range(d):
                    scaled = yv[i, a] * m
                    j = <Py_ssize_t> floor(scaled)
                    if j > m - 1:
                        j = m - 1
                    local[a] = scaled - j
                    flat = flat * m + j
                _level_table(local, d, ell, w)
                acc = 0.0
                for k in range(M):
                    prod = values[flat, k]
                    for t in range(d + 1):
                        prod = prod * w[t * stride + nodes[k, t]]
                    acc = acc + prod
                ov[i] = acc
    finally:
        free(w)
    return out


def kde_sum(samples, queries, coef, double h):
    cdef const double[:, ::1] xs = np.ascontiguousarray(samples, dtype=np.float64)
    cdef const double[:, ::1] ys = np.ascontiguousarray(queries, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(coef, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], d = xs.shape[1], q = ys.shape[0]
    cdef Py_ssize_t p = cv.shape[0], i, j, a, c
    out = np.zeros(q, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double inv_h = 1.0 / h, acc, prod, u, uc, val
    with nogil:
        for j in range(q):
            acc = 0.0
            for i in range(n):
                prod = 1.0
                # branch-free: every sample costs the same, as in the numpy path
                for a in range(d):
                    u = (xs[i, a] - ys[j, a]) * inv_h
                    uc = fmin(fmax(u, -2.0), 2.0)  # no overflow to inf * 0 for far samples
                    val = cv[p - 1]
                    for c in range(p - 2, -1, -1):
                        val = val * uc + cv[c]
                    # indicator of |u| <= 1 without a comparison branch
                    prod = prod * val * (0.5 + 0.5 * copysign(1.0, 1.0 - fabs(u)))
                acc = acc + prod
            ov[j] = acc
    return out
