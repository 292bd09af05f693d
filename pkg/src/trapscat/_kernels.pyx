# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: fused phase multiplies and Gaussian bump accumulation.

Mirrors _kernels_np; selected by trapscat.backend when built.
"""
from libc.math cimport cos, exp, sin

import numpy as np

cimport numpy as cnp

cnp.import_array()


def cis_mul(psi, phase, double scale):
    """psi *= exp(1j * scale * phase) in one fused pass."""
    cdef double complex[::1] p = psi.reshape(-1)
    cdef const double[::1] v = np.ascontiguousarray(phase, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double ph, c, s
    if v.shape[0] != n:
        raise ValueError("psi and phase must have the same size")
    for i in range(n):
        ph = scale * v[i]
        c = cos(ph)
        s = sin(ph)
        p[i] = p[i] * (c + 1j * s)


def gauss2d_accum(out, x0, x1, double c0, double c1, double amp, double inv_w2):
    """out += amp * exp(-((x0-c0)^2 + (x1-c1)^2) * inv_w2) on the tensor grid."""
    cdef double[:, ::1] o = out
    cdef const double[::1] a0 = np.ascontiguousarray(x0, dtype=np.float64)
    cdef const double[::1] a1 = np.ascontiguousarray(x1, dtype=np.float64)
    cdef Py_ssize_t i, j, n0 = a0.shape[0], n1 = a1.shape[0]
    cdef double e0, d
    cdef double[::1] e1 = np.empty(n1)
    if o.shape[0] != n0 or o.shape[1] != n1:
        raise ValueError("out shape must be (len(x0), len(x1))")
    for j in range(n1):
        d = a1[j] - c1
        e1[j] = exp(-d * d * inv_w2)
    for i in range(n0):
        d = a0[i] - c0
        e0 = amp * exp(-d * d * inv_w2)
        for j in range(n1):
            o[i, j] += e0 * e1[j]
