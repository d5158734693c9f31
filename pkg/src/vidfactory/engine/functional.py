"""Neural-net ops built on the autograd core and the patch kernels.

conv2d loops the GEMM per sample on purpose: every sample sees the exact
same GEMM shape no matter how many samples are batched, which is what keeps
single-frame and batched-frame forwards bit-identical.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .autograd import Tensor, _make, concat, matmul, silu, softmax  # noqa: F401 (re-export)
from .autograd import add, mul, power, reshape, sqrt, transpose


def conv2d(x: Tensor, w: Tensor, b: Tensor | None, stride: int = 1) -> Tensor:
    """'same'-padded conv. x: (N, Cin, H, W), w: (Cout, Cin, kh, kw)."""
    n, cin, h, wdt = x.shape
    cout, cin_w, kh, kw = w.shape
    assert cin == cin_w, (cin, cin_w)
    ph, pw = kh // 2, kw // 2
    ho = (h + 2 * ph - kh) // stride + 1
    wo = (wdt + 2 * pw - kw) // stride + 1

    wmat = w.data.reshape(cout, cin * kh * kw)
    xp = np.pad(x.data, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    cols_list = []
    out_data = np.empty((n, cout, ho, wo), dtype=x.dtype)
    for i in range(n):
        cols = backend.im2col2d(np.ascontiguousarray(xp[i]), kh, kw, stride)
        cols_list.append(cols)
        y = wmat @ cols
        if b is not None:
            y = y + b.data[:, None]
        out_data[i] = y.reshape(cout, ho, wo)

    parents = (x, w) if b is None else (x, w, b)

    def backward(g):
        gw = np.zeros_like(wmat) if w.requires_grad else None
        gx = np.empty((n, cin, h, wdt), dtype=g.dtype) if x.requires_grad else None
        for i in range(n):
            gy = g[i].reshape(cout, ho * wo)
            if gw is not None:
                gw += gy @ cols_list[i].T
            if gx is not None:
                gcols = wmat.T @ gy
                gxp = backend.col2im2d(
                    np.ascontiguousarray(gcols), cin, h + 2 * ph, wdt + 2 * pw, kh, kw, stride
                )
                gx[i] = gxp[:, ph : ph + h, pw : pw + wdt]
        if x.requires_grad:
            x._accumulate(gx)
        if w.requires_grad:
            w._accumulate(gw.reshape(w.shape))
        if b is not None and b.requires_grad:
            b._accumulate(g.sum(axis=(0, 2, 3)))

    return _make(out_data, parents, backward)


def conv1d_frames(x: Tensor, w: Tensor, b: Tensor | None) -> Tensor:
    """'same'-padded conv over the last axis. x: (S, C, F), w: (Cout, Cin, k)."""
    s, cin, f = x.shape
    cout, cin_w, k = w.shape
    assert cin == cin_w
    p = k // 2
    xp = np.pad(x.data, ((0, 0), (0, 0), (p, p)))
    st = xp.strides
    cols = np.ascontiguousarray(
        np.lib.stride_tricks.as_strided(
            xp, shape=(s, cin, k, f), strides=(st[0], st[1], st[2], st[2])
        )
    ).reshape(s, cin * k, f)
    wmat = w.data.reshape(cout, cin * k)
    out_data = np.matmul(wmat, cols)
    if b is not None:
        out_data = out_data + b.data[None, :, None]

    parents = (x, w) if b is None else (x, w, b)

    def backward(g):
        if w.requires_grad:
            gw = np.tensordot(g, cols, axes=([0, 2], [0, 2]))
            w._accumulate(gw.reshape(w.shape))
        if b is not None and b.requires_grad:
            b._accumulate(g.sum(axis=(0, 2)))
        if x.requires_grad:
            gcols = np.matmul(wmat.T, g).reshape(s, cin, k, f)
            gxp = np.zeros_like(xp)
            for kk in range(k):
                gxp[:, :, kk : kk + f] += gcols[:, :, kk, :]
            x._accumulate(np.ascontiguousarray(gxp[:, :, p : p + f]))

    return _make(out_data, parents, backward)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """Row-wise affine map. x: (..., din), w: (din, dout).

    Rows are kept on a batch axis (N, 1, din) so each row runs the same GEMM
    regardless of batch size.
    """
    lead = x.shape[:-1]
    din = x.shape[-1]
    xr = reshape(x, (-1, 1, din))
    y = matmul(xr, w)
    y = reshape(y, lead + (w.shape[-1],))
    if b is not None:
        y = add(y, b)
    return y


def group_norm(x: Tensor, gamma: Tensor, beta: Tensor, groups: int, eps: float = 1e-5) -> Tensor:
    """x: (N, C, *spatial); normalizes per (sample, group)."""
    n, c = x.shape[0], x.shape[1]
    spatial = x.shape[2:]
    xg = reshape(x, (n, groups, -1))
    mu = xg.mean(axis=2, keepdims=True)
    xc = xg - mu
    var = (xc * xc).mean(axis=2, keepdims=True)
    y = xc * power(var + eps, -0.5)
    y = reshape(y, (n, c) + spatial)
    gshape = (1, c) + (1,) * len(spatial)
    return y * reshape(gamma, gshape) + reshape(beta, gshape)


def attention(
    q: Tensor, k: Tensor, v: Tensor, n_heads: int
) -> Tensor:
    """Multi-head scaled dot-product attention.

    q: (B, Lq, C), k/v: (B, Lk, C). B stays a batch axis throughout.
    """
    bsz, lq, c = q.shape
    lk = k.shape[1]
    dh = c // n_heads
    scale = float(dh) ** -0.5

    def split(t: Tensor, length: int) -> Tensor:
        t = reshape(t, (bsz, length, n_heads, dh))
        return transpose(t, (0, 2, 1, 3))

    qh, kh, vh = split(q, lq), split(k, lk), split(v, lk)
    scores = matmul(qh, transpose(kh, (0, 1, 3, 2))) * scale
    attn = softmax(scores, axis=-1)
    out = matmul(attn, vh)
    out = transpose(out, (0, 2, 1, 3))
    return reshape(out, (bsz, lq, c))


def upsample2x(x: Tensor) -> Tensor:
    """Nearest-neighbor 2x upsample. x: (N, C, H, W)."""
    n, c, h, w = x.shape
    out_data = np.repeat(np.repeat(x.data, 2, axis=2), 2, axis=3)

    def backward(g):
        x._accumulate(g.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)))

    return _make(out_data, (x,), backward)
