# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: one-sided moment sums and wedge-body radial minima.

Mirrors the signatures in ``_kernels_py``; selected at import by
``affine_energy.kernels``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow, INFINITY

cnp.import_array()


def one_sided_power_sums(object dirs_o, object pts_o, double p, object wts_o=None):
    """See ``_kernels_py.one_sided_power_sums``; sequential per-direction sums."""
    cdef double[:, ::1] dirs = np.ascontiguousarray(dirs_o, dtype=np.float64)
    cdef double[:, ::1] pts = np.ascontiguousarray(pts_o, dtype=np.float64)
    cdef double[::1] wts
    cdef bint has_w = wts_o is not None
    if has_w:
        wts = np.ascontiguousarray(wts_o, dtype=np.float64)
    cdef Py_ssize_t m = dirs.shape[0]
    cdef Py_ssize_t n = dirs.shape[1]
    cdef Py_ssize_t N = pts.shape[0]
    pos_arr = np.zeros(m, dtype=np.float64)
    neg_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] pos = pos_arr
    cdef double[::1] neg = neg_arr
    cdef Py_ssize_t i, j, k
    cdef double t, w, sp, sn
    cdef bint p1 = p == 1.0
    cdef bint p2 = p == 2.0
    for i in range(m):
        sp = 0.0
        sn = 0.0
        for j in range(N):
            t = 0.0
            for k in range(n):
                t += dirs[i, k] * pts[j, k]
            w = wts[j] if has_w else 1.0
            if t > 0.0:
                if p1:
                    sp += w * t
                elif p2:
                    sp += w * t * t
                else:
                    sp += w * pow(t, p)
            elif t < 0.0:
                t = -t
                if p1:
                    sn += w * t
                elif p2:
                    sn += w * t * t
                else:
                    sn += w * pow(t, p)
        pos[i] = sp
        neg[i] = sn
    return pos_arr, neg_arr


def radial_from_support(object qdirs_o, object bdirs_o, object h_o, double pos_tol=1e-12):
    """See ``_kernels_py.radial_from_support``."""
    cdef double[:, ::1] qdirs = np.ascontiguousarray(qdirs_o, dtype=np.float64)
    cdef double[:, ::1] bdirs = np.ascontiguousarray(bdirs_o, dtype=np.float64)
    cdef double[::1] h = np.ascontiguousarray(h_o, dtype=np.float64)
    cdef Py_ssize_t m = qdirs.shape[0]
    cdef Py_ssize_t n = qdirs.shape[1]
    cdef Py_ssize_t nb = bdirs.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double t, r, best
    for i in range(m):
        best = INFINITY
        for j in range(nb):
            t = 0.0
            for k in range(n):
                t += qdirs[i, k] * bdirs[j, k]
            if t > pos_tol:
                r = h[j] / t
                if r < best:
                    best = r
        out[i] = best
    return out_arr
