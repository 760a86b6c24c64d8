"""Adam with optional decoupled freeze masks (dead slots never move)."""

import numpy as np


class Adam:
    def __init__(self, tensors, lr, weight_decay=0.0, betas=(0.9, 0.999), eps=1e-8,
                 frozen=None):
        """`frozen` is an optional list aligned with `tensors`: boolean arrays
        marking slots that must not be updated (pruned entries)."""
        self.tensors = list(tensors)
        self.lr = float(lr)
        self.weight_decay = float(weight_decay)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.frozen = list(frozen) if frozen is not None else [None] * len(self.tensors)
        if len(self.frozen) != len(self.tensors):
            raise ValueError("frozen list must align with tensors")
        self.reset_state()

    def reset_state(self):
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.tensors]
        self.v = [np.zeros_like(p.data) for p in self.tensors]

    def step(self):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        # overflow here surfaces as a non-finite forward on the next iteration
        with np.errstate(invalid="ignore", over="ignore"):
            self._step(bc1, bc2)

    def _step(self, bc1, bc2):
        for i, p in enumerate(self.tensors):
            if p.grad is None:
                continue
            g = p.grad
            if self.weight_decay:
                g = g + p.data * p.dtype.type(self.weight_decay)
            if self.frozen[i] is not None:
                g = np.where(self.frozen[i].reshape(p.shape), 0, g)
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            p.data -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.dtype)
