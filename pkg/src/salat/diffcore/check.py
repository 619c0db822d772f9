"""Analytic gradients of ParamStore losses, and the finite-difference probe."""

from __future__ import annotations

import numpy as np

from .params import ParamStore, collect_grads
from .tape import backward


def gradient(loss_fn, params: ParamStore) -> ParamStore:
    """Reverse-mode gradient of ``loss_fn(param_vars) -> scalar Var``."""
    pv = params.as_vars()
    loss = loss_fn(pv)
    backward(loss)
    return collect_grads(pv)


def finite_difference_gradient(loss_fn, params: ParamStore, h=1e-5) -> ParamStore:
    """Central finite differences on the flat parameter vector."""
    probe = params.copy()
    flat = probe.to_flat()
    grad_flat = np.zeros_like(flat)
    for i in range(flat.size):
        for sign in (+1.0, -1.0):
            bumped = flat.copy()
            bumped[i] += sign * h
            probe.from_flat(bumped)
            grad_flat[i] += sign * float(loss_fn(probe.as_vars()).data)
        grad_flat[i] /= 2.0 * h
    probe.from_flat(flat)
    grads = params.copy()
    grads.from_flat(grad_flat)
    return grads


def max_relative_error(analytic: ParamStore, numeric: ParamStore) -> float:
    a = analytic.to_flat()
    n = numeric.to_flat()
    scale = np.maximum(np.abs(a) + np.abs(n), 1.0)
    return float(np.max(np.abs(a - n) / scale))
