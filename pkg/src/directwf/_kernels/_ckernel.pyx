# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused single-row-pass version of ``_fallback.state_moments``."""
import numpy as np

from libc.math cimport hypot, sqrt

cdef double PATHOLOGICAL_TOL = 1e-12


def state_moments(z):
    """Same contract as the numpy fallback; ``z`` is a C-contiguous complex128 (m, d) array."""
    zc = np.ascontiguousarray(z, dtype=np.complex128)
    cdef Py_ssize_t m = zc.shape[0]
    cdef Py_ssize_t d = zc.shape[1]
    cdef const double[:, ::1] a = zc.view(np.float64).reshape(m, 2 * d)
    out = np.empty((m, 8), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, k
    cdef double nr, sr, si, h, inv, cr, ci, zr, zi, re, im, p, pt
    cdef double s_pr, s_pi, s_pp, s_prr, s_ppr, s_ppp, s_var, dr, di
    with nogil:
        for i in range(m):
            nr = 0.0
            sr = 0.0
            si = 0.0
            for k in range(d):
                zr = a[i, 2 * k]
                zi = a[i, 2 * k + 1]
                nr += zr * zr + zi * zi
                sr += zr
                si += zi
            inv = 1.0 / sqrt(nr)
            h = hypot(sr, si)
            pt = h * inv
            if pt > PATHOLOGICAL_TOL:
                cr = sr / h * inv
                ci = -si / h * inv
            else:
                cr = inv
                ci = 0.0
            s_pr = 0.0
            s_pi = 0.0
            s_pp = 0.0
            s_prr = 0.0
            s_ppr = 0.0
            s_ppp = 0.0
            for k in range(d):
                zr = a[i, 2 * k]
                zi = a[i, 2 * k + 1]
                re = zr * cr - zi * ci
                im = zr * ci + zi * cr
                p = re * re + im * im
                s_pr += p * re
                s_pi += p * im
                s_pp += p * p
                s_prr += p * re * re
                s_ppr += p * p * re
                s_ppp += p * p * p
            o[i, 0] = pt
            o[i, 1] = s_pr
            o[i, 2] = s_pi
            o[i, 3] = s_pp
            o[i, 4] = s_prr
            o[i, 5] = s_ppr
            o[i, 6] = s_ppp
            # centred second pass: the variance of nearly flat states needs it
            s_var = 0.0
            for k in range(d):
                zr = a[i, 2 * k]
                zi = a[i, 2 * k + 1]
                re = zr * cr - zi * ci
                im = zr * ci + zi * cr
                dr = re - s_pr
                di = im - s_pi
                s_var += (re * re + im * im) * (dr * dr + di * di)
            o[i, 7] = s_var
    return out
