# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled three-term recurrence kernels (same contract as _kernels_py)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def jacobi_table(double a, double b, Py_ssize_t nmax, x):
    xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t m = xs.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((nmax + 1, m))
    cdef double[:, ::1] o = out
    cdef const double[::1] xv = xs
    cdef Py_ssize_t n, i
    cdef double ab = a + b, c, a1, a2, a3, a4
    for i in range(m):
        o[0, i] = 1.0
    if nmax == 0:
        return out
    for i in range(m):
        o[1, i] = 0.5 * ((a - b) + (ab + 2.0) * xv[i])
    for n in range(2, nmax + 1):
        c = 2.0 * n + ab
        a1 = 2.0 * n * (n + ab) * (c - 2.0)
        a2 = (c - 1.0) * (a * a - b * b) / a1
        a3 = (c - 2.0) * (c - 1.0) * c / a1
        a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c / a1
        for i in range(m):
            o[n, i] = (a2 + a3 * xv[i]) * o[n - 1, i] - a4 * o[n - 2, i]
    return out


def legendre_table(Py_ssize_t nmax, x):
    xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t m = xs.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((nmax + 1, m))
    cdef double[:, ::1] o = out
    cdef const double[::1] xv = xs
    cdef Py_ssize_t n, i
    for i in range(m):
        o[0, i] = 1.0
    if nmax == 0:
        return out
    for i in range(m):
        o[1, i] = xv[i]
    for n in range(2, nmax + 1):
        for i in range(m):
            o[n, i] = ((2 * n - 1) * xv[i] * o[n - 1, i] - (n - 1) * o[n - 2, i]) / n
    return out
