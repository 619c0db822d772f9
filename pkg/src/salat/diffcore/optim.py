"""Adaptive-moment gradient descent (Adam) over ParamStore arrays."""

from __future__ import annotations

import numpy as np

from .params import ParamStore


class Adam:
    def __init__(self, params: ParamStore, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.step_count = 0
        self.m = {name: np.zeros_like(arr) for name, arr in params.items()}
        self.v = {name: np.zeros_like(arr) for name, arr in params.items()}

    def step(self, params: ParamStore, grads: ParamStore) -> None:
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for {name!r}")
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for name in self.m:
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g**2
            m_hat = self.m[name] / bc1
            v_hat = self.v[name] / bc2
            params[name] = params[name] - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
