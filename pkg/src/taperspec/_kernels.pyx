# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel: fused per-replicate tapered DFT -> periodogram powers
-> weighted quadrature.

One flat loop over replicates; each replicate's accumulation is fully
independent and sequential, so the output is bitwise identical for any
``num_threads`` (OpenMP only partitions the replicate range).
"""
from cython.parallel import prange

import numpy as np


def batch_functionals(double[:, ::1] X, double[:, ::1] cos_t,
                      double[:, ::1] sin_t, double[:, ::1] w_re,
                      double[:, ::1] w_im, long[::1] ks, double inv_norm,
                      int num_threads=1):
    """Same contract as the numpy fallback; see _kernels_np.batch_functionals."""
    cdef Py_ssize_t R = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    cdef Py_ssize_t N = cos_t.shape[0]
    cdef Py_ssize_t m = ks.shape[0]
    if sin_t.shape[0] != N or sin_t.shape[1] != n or cos_t.shape[1] != n:
        raise ValueError("grid matrices must both be (N, n)")
    if w_re.shape[0] != m or w_im.shape[0] != m or w_re.shape[1] != N \
            or w_im.shape[1] != N:
        raise ValueError("weight matrices must be (m, N)")

    out_re = np.zeros((R, m))
    out_im = np.zeros((R, m))
    cdef double[:, ::1] ore = out_re
    cdef double[:, ::1] oim = out_im
    cdef Py_ssize_t r, j, t, i, p
    cdef double dre, dim, I, pw
    cdef int nt = num_threads if num_threads > 0 else 1

    for r in prange(R, nogil=True, num_threads=nt, schedule='static'):
        for j in range(N):
            dre = 0.0
            dim = 0.0
            for t in range(n):
                dre = dre + cos_t[j, t] * X[r, t]
                dim = dim + sin_t[j, t] * X[r, t]
            I = (dre * dre + dim * dim) * inv_norm
            for i in range(m):
                pw = I
                for p in range(1, ks[i]):
                    pw = pw * I
                ore[r, i] += w_re[i, j] * pw
                oim[r, i] += w_im[i, j] * pw
    return out_re + 1j * out_im
