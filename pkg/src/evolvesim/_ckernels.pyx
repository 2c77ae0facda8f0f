# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: clipped linear evaluation and count-weighted
power-loss performance over a batch of candidate coefficient vectors."""

import numpy as np

cimport numpy as cnp

from libc.math cimport fabs, pow


def clip_eval(const double[:, ::1] design, const double[:, ::1] coeffs):
    """Clipped linear values; design is (m, n+1) with a leading ones column."""
    cdef Py_ssize_t ncand = coeffs.shape[0]
    cdef Py_ssize_t m = design.shape[0]
    cdef Py_ssize_t d = design.shape[1]
    out_arr = np.empty((ncand, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double v
    for i in range(ncand):
        for j in range(m):
            v = 0.0
            for k in range(d):
                v += coeffs[i, k] * design[j, k]
            if v > 1.0:
                v = 1.0
            elif v < -1.0:
                v = -1.0
            out[i, j] = v
    return out_arr


def power_perf(const double[:, ::1] design, const double[:, ::1] coeffs,
               const double[::1] fvals, const long long[:, ::1] counts,
               long long s, double c, double scale):
    """Empirical lperf per candidate from multinomial sample counts.

    Loss is |f - phi|^c / 2^(c-1); ``scale`` is L(-1, 1) of the caller's loss
    (4 for the unscaled quadratic, 2 otherwise) with the matching extra
    factor folded into ``scale`` by the dispatcher.
    """
    cdef Py_ssize_t ncand = coeffs.shape[0]
    cdef Py_ssize_t m = design.shape[0]
    cdef Py_ssize_t d = design.shape[1]
    cdef double denom = pow(2.0, c - 1.0)
    cdef int quad = 1 if c == 2.0 else 0
    out_arr = np.empty(ncand, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double v, diff, total
    for i in range(ncand):
        total = 0.0
        for j in range(m):
            if counts[i, j] == 0:
                continue
            v = 0.0
            for k in range(d):
                v += coeffs[i, k] * design[j, k]
            if v > 1.0:
                v = 1.0
            elif v < -1.0:
                v = -1.0
            diff = fabs(fvals[j] - v)
            if quad:
                total += counts[i, j] * (diff * diff / 2.0)
            else:
                total += counts[i, j] * (pow(diff, c) / denom)
        out[i] = 1.0 - 2.0 * total / (scale * <double> s)
    return out_arr
