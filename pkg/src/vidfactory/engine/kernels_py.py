"""Pure-numpy patch kernels; reference implementation of the compiled ones.

Both backends must stay bit-identical. The layout contract:

  cols[(c*kh + ki)*kw + kj, ho*Wo + wo] = xp[c, ho*stride + ki, wo*stride + kj]

col2im accumulates per destination pixel in ascending (ki, kj) order; the
compiled kernel follows the same order so conv backward bytes agree across
backends.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided


def im2col2d(xp: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    c, hp, wp = xp.shape
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    sc, sh, sw = xp.strides
    view = as_strided(
        xp,
        shape=(c, kh, kw, ho, wo),
        strides=(sc, sh, sw, sh * stride, sw * stride),
    )
    return np.ascontiguousarray(view).reshape(c * kh * kw, ho * wo)


def col2im2d(
    cols: np.ndarray, c: int, hp: int, wp: int, kh: int, kw: int, stride: int
) -> np.ndarray:
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    xp = np.zeros((c, hp, wp), dtype=cols.dtype)
    cols5 = cols.reshape(c, kh, kw, ho, wo)
    for ki in range(kh):
        for kj in range(kw):
            xp[:, ki : ki + stride * ho : stride, kj : kj + stride * wo : stride] += cols5[
                :, ki, kj
            ]
    return xp
