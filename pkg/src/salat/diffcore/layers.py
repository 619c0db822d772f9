"""Dense, GRU and bidirectional GRU layers on top of the tape.

The GRU sequence is a fused tape primitive with a hand-derived backward
pass (classic BPTT); this keeps the tape short enough that full-batch
training of recurrent flows stays fast in pure numpy.

Gate convention (Cho et al. style):
    r = sigmoid(x Wx_r + h Wh_r + b_r)
    z = sigmoid(x Wx_z + h Wh_z + b_z)
    c = tanh(x Wx_c + (r * h) Wh_c + b_c)
    h' = (1 - z) * c + z * h
"""

from __future__ import annotations

import numpy as np

from .params import ParamStore
from .tape import Var, concat

__all__ = [
    "init_dense",
    "dense",
    "init_gru",
    "gru_sequence",
    "init_bigru",
    "bigru",
]


def _uniform_init(rng, fan_in, shape):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


# ---------------------------------------------------------------------------
# dense


def init_dense(store: ParamStore, prefix: str, n_in: int, n_out: int, rng, zero=False):
    if zero:
        store[f"{prefix}.W"] = np.zeros((n_in, n_out))
    else:
        store[f"{prefix}.W"] = _uniform_init(rng, n_in, (n_in, n_out))
    store[f"{prefix}.b"] = np.zeros(n_out)


def dense(pv: dict, prefix: str, x: Var) -> Var:
    return x @ pv[f"{prefix}.W"] + pv[f"{prefix}.b"]


# ---------------------------------------------------------------------------
# GRU


def init_gru(store: ParamStore, prefix: str, n_in: int, n_h: int, rng):
    store[f"{prefix}.Wx"] = _uniform_init(rng, n_in, (n_in, 3 * n_h))
    store[f"{prefix}.Wh"] = _uniform_init(rng, n_h, (n_h, 2 * n_h))
    store[f"{prefix}.Whc"] = _uniform_init(rng, n_h, (n_h, n_h))
    store[f"{prefix}.b"] = np.zeros(3 * n_h)


def _gru_forward(Wx, Wh, Whc, b, x):
    """x: (T, B, in) -> h_seq (T, B, H) plus cached activations."""
    T, B, _ = x.shape
    H = Whc.shape[0]
    xw = x.reshape(T * B, -1) @ Wx
    xw = xw.reshape(T, B, 3 * H)
    h = np.zeros((B, H))
    h_seq = np.empty((T, B, H))
    cache_r = np.empty((T, B, H))
    cache_z = np.empty((T, B, H))
    cache_c = np.empty((T, B, H))
    b_rz, b_c = b[: 2 * H], b[2 * H :]
    for t in range(T):
        pre = xw[t, :, : 2 * H] + h @ Wh + b_rz
        rz = 1.0 / (1.0 + np.exp(-pre))
        r, z = rz[:, :H], rz[:, H:]
        c = np.tanh(xw[t, :, 2 * H :] + (r * h) @ Whc + b_c)
        h = (1.0 - z) * c + z * h
        h_seq[t] = h
        cache_r[t], cache_z[t], cache_c[t] = r, z, c
    return h_seq, (cache_r, cache_z, cache_c)


def _gru_backward(Wx, Wh, Whc, b, x, h_seq, cache, g_out):
    """BPTT given upstream gradients g_out on every h_t."""
    T, B, _ = x.shape
    H = Whc.shape[0]
    cache_r, cache_z, cache_c = cache
    dxw = np.zeros((T, B, 3 * H))
    dWh = np.zeros_like(Wh)
    dWhc = np.zeros_like(Whc)
    db = np.zeros_like(b)
    dh = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        h_prev = h_seq[t - 1] if t > 0 else np.zeros((B, H))
        r, z, c = cache_r[t], cache_z[t], cache_c[t]
        dh = dh + g_out[t]
        dz = dh * (h_prev - c) * z * (1.0 - z)
        dc = dh * (1.0 - z) * (1.0 - c**2)
        dxw[t, :, 2 * H :] = dc
        dWhc += (r * h_prev).T @ dc
        db[2 * H :] += dc.sum(axis=0)
        d_rh = dc @ Whc.T
        dr = d_rh * h_prev * r * (1.0 - r)
        dpre_rz = np.concatenate([dr, dz], axis=1)
        dxw[t, :, : 2 * H] = dpre_rz
        dWh += h_prev.T @ dpre_rz
        db[: 2 * H] += dpre_rz.sum(axis=0)
        dh = dh * z + d_rh * r + dpre_rz @ Wh.T
    flat_x = x.reshape(T * B, -1)
    flat_dxw = dxw.reshape(T * B, 3 * H)
    dWx = flat_x.T @ flat_dxw
    dx = (flat_dxw @ Wx.T).reshape(x.shape)
    return dWx, dWh, dWhc, db, dx


def gru_sequence(pv: dict, prefix: str, x: Var) -> Var:
    """Run a GRU over x (T, B, in); returns hidden states (T, B, H)."""
    Wx, Wh, Whc, b = (
        pv[f"{prefix}.Wx"],
        pv[f"{prefix}.Wh"],
        pv[f"{prefix}.Whc"],
        pv[f"{prefix}.b"],
    )
    h_seq, cache = _gru_forward(Wx.data, Wh.data, Whc.data, b.data, x.data)

    def vjp(g):
        return _gru_backward(
            Wx.data, Wh.data, Whc.data, b.data, x.data, h_seq, cache, g
        )

    return Var(h_seq, (Wx, Wh, Whc, b, x), vjp)


# ---------------------------------------------------------------------------
# bidirectional GRU with per-step output projection


def init_bigru(
    store: ParamStore,
    prefix: str,
    n_in: int,
    n_h: int,
    n_out: int,
    rng,
    zero_out=False,
):
    init_gru(store, f"{prefix}.fwd", n_in, n_h, rng)
    init_gru(store, f"{prefix}.bwd", n_in, n_h, rng)
    init_dense(store, f"{prefix}.out", 2 * n_h, n_out, rng, zero=zero_out)


def _reverse_time(x: Var) -> Var:
    return Var(x.data[::-1].copy(), (x,), lambda g: (g[::-1].copy(),))


def bigru(pv: dict, prefix: str, x: Var) -> Var:
    """x: (T, B, in) -> (T, B, out); step t sees the whole sequence."""
    h_f = gru_sequence(pv, f"{prefix}.fwd", x)
    h_b = _reverse_time(gru_sequence(pv, f"{prefix}.bwd", _reverse_time(x)))
    h = concat([h_f, h_b], axis=2)
    T, B, twoH = h.shape
    out = dense(pv, f"{prefix}.out", h.reshape(T * B, twoH))
    return out.reshape(T, B, -1)
