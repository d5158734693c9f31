"""Adam over a ParamStore subset. Updates in place, trainable names only."""

from __future__ import annotations

import numpy as np


class Adam:
    def __init__(self, names, store, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.names = list(names)
        self.store = store
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = {n: np.zeros_like(store.arrays[n]) for n in self.names}
        self.v = {n: np.zeros_like(store.arrays[n]) for n in self.names}

    def step(self, grads: dict[str, np.ndarray]):
        self.t += 1
        b1t = 1.0 - self.b1**self.t
        b2t = 1.0 - self.b2**self.t
        for n in self.names:
            g = grads.get(n)
            if g is None:
                continue
            m = self.m[n]
            v = self.v[n]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * (g * g)
            mhat = m / b1t
            vhat = v / b2t
            self.store.arrays[n] -= (self.lr * mhat / (np.sqrt(vhat) + self.eps)).astype(
                self.store.arrays[n].dtype
            )
