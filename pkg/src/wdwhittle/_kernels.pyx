# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled recursions for the nonlinear simulators.

Every loop mirrors :mod:`wdwhittle._kernels_py` operation for operation so
that both back ends return bit-identical output.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def garch_filter(const double[::1] xi, double a0, const double[::1] a,
                 const double[::1] c):
    cdef Py_ssize_t n = xi.shape[0], q = a.shape[0], qp = c.shape[0]
    cdef Py_ssize_t k, j
    cdef double s
    out = np.zeros(n, dtype=np.float64)
    rho2_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] x = out
    cdef double[::1] rho2 = rho2_arr
    for k in range(n):
        s = a0
        for j in range(1, q + 1):
            if j > k:
                break
            s += a[j - 1] * x[k - j] * x[k - j]
        for j in range(1, qp + 1):
            if j > k:
                break
            s += c[j - 1] * rho2[k - j]
        rho2[k] = s
        x[k] = sqrt(s) * xi[k]
    return out


def arch_filter(const double[::1] xi, double b0, const double[::1] b):
    cdef Py_ssize_t n = xi.shape[0], L = b.shape[0]
    cdef Py_ssize_t k, j
    cdef double s
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] x = out
    for k in range(n):
        s = b0
        for j in range(1, L + 1):
            if j > k:
                break
            s += b[j - 1] * x[k - j] * x[k - j]
        x[k] = sqrt(s) * xi[k]
    return out


def bilinear_filter(const double[::1] xi, double a0, const double[::1] a,
                    const double[::1] c):
    cdef Py_ssize_t n = xi.shape[0], La = a.shape[0], Lc = c.shape[0]
    cdef Py_ssize_t k, j
    cdef double s, t
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] x = out
    for k in range(n):
        s = a0
        for j in range(1, La + 1):
            if j > k:
                break
            s += a[j - 1] * x[k - j]
        t = 0.0
        for j in range(1, Lc + 1):
            if j > k:
                break
            t += c[j - 1] * x[k - j]
        x[k] = xi[k] * s + t
    return out
