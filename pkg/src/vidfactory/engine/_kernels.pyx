# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled patch kernels (im2col / col2im) for the conv hot path.

Layout and accumulation-order contract documented in kernels_py.py; the two
backends are bit-identical.
"""

import numpy as np

cimport cython

ctypedef fused floating:
    float
    double


def im2col2d(floating[:, :, ::1] xp, int kh, int kw, int stride):
    cdef int c = xp.shape[0]
    cdef int hp = xp.shape[1]
    cdef int wp = xp.shape[2]
    cdef int ho = (hp - kh) // stride + 1
    cdef int wo = (wp - kw) // stride + 1
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    out = np.empty((c * kh * kw, ho * wo), dtype=dtype)
    cdef floating[:, ::1] cols = out
    cdef int ci, ki, kj, i, j, row
    for ci in range(c):
        for ki in range(kh):
            for kj in range(kw):
                row = (ci * kh + ki) * kw + kj
                for i in range(ho):
                    for j in range(wo):
                        cols[row, i * wo + j] = xp[ci, i * stride + ki, j * stride + kj]
    return out


def col2im2d(floating[:, ::1] cols, int c, int hp, int wp, int kh, int kw, int stride):
    cdef int ho = (hp - kh) // stride + 1
    cdef int wo = (wp - kw) // stride + 1
    if floating is float:
        dtype = np.float32
    else:
        dtype = np.float64
    out = np.zeros((c, hp, wp), dtype=dtype)
    cdef floating[:, :, ::1] xp = out
    cdef int ci, ki, kj, i, j, row
    # Per destination pixel the (ki, kj) contributions accumulate in
    # ascending order, matching the pure backend.
    for ci in range(c):
        for ki in range(kh):
            for kj in range(kw):
                row = (ci * kh + ki) * kw + kj
                for i in range(ho):
                    for j in range(wo):
                        xp[ci, i * stride + ki, j * stride + kj] += cols[row, i * wo + j]
    return out
