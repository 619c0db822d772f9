"""Recurrent RealNVP density model for local-frame trajectories.

A model is a stack of affine coupling blocks whose scale/translation
functions are Bi-GRUs over the whole sequence, mapping a T x D local
trajectory to a latent trajectory distributed under either an i.i.d.
standard Gaussian or a temporally correlated Gaussian with a squared
exponential kernel. The coupling split alternates between blocks.

Scale-net outputs are soft-clamped with c*tanh(s/c) so exp() cannot
overflow at untrained parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .diffcore import Adam, ParamStore, Var, backward, bigru, collect_grads, init_bigru
from .geometry import Trajectory

FLOW_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class FlowTopology:
    dim: int
    horizon: int
    num_blocks: int
    hidden: int
    prior: str  # "gp" | "iid"
    scale_clamp: float
    sigma_f: float
    length_scale: float

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("coupling needs at least 2 dimensions")
        if self.prior not in ("gp", "iid"):
            raise ValueError(f"unknown prior {self.prior!r}")

    @property
    def split(self) -> int:
        return self.dim // 2

    def block_parts(self, index: int):
        """(active, passive) dim index arrays for one coupling block.

        `passive` feeds the nets; `active` dims get scaled/translated
        first (the z1 role). Roles alternate between blocks.
        """
        d1 = self.split
        first = np.arange(0, d1)
        second = np.arange(d1, self.dim)
        return (first, second) if index % 2 == 0 else (second, first)


def init_flow_params(top: FlowTopology, rng) -> ParamStore:
    """Zero output projections: every block starts as the identity map."""
    store = ParamStore()
    for i in range(top.num_blocks):
        p1, p2 = top.block_parts(i)
        n1, n2 = len(p1), len(p2)
        for name, n_in, n_out in (
            ("s1", n2, n1),
            ("t1", n2, n1),
            ("s2", n1, n2),
            ("t2", n1, n2),
        ):
            init_bigru(
                store, f"block{i}.{name}", n_in, top.hidden, n_out, rng, zero_out=True
            )
    return store


def _clamp_scale(s: Var, c: float) -> Var:
    return (s * (1.0 / c)).tanh() * c


def _take_dims(x: Var, idx) -> Var:
    return x[:, :, slice(idx[0], idx[-1] + 1)]


def _merge_dims(top: FlowTopology, first_part: Var, second_part: Var, index: int) -> Var:
    from .diffcore import concat

    p_active, p_passive = top.block_parts(index)
    if index % 2 == 0:
        return concat([first_part, second_part], axis=2)
    return concat([second_part, first_part], axis=2)


def coupling_forward(top: FlowTopology, pv: dict, index: int, y: Var):
    """One block of affine coupling; returns (z, per-step log-det).

    y: (T, B, D). log-det: (T, B) summed over scaled dimensions.
    """
    p_active, p_passive = top.block_parts(index)
    y1 = _take_dims(y, p_active)
    y2 = _take_dims(y, p_passive)
    s1 = _clamp_scale(bigru(pv, f"block{index}.s1", y2), top.scale_clamp)
    t1 = bigru(pv, f"block{index}.t1", y2)
    z1 = y1 * s1.exp() + t1
    s2 = _clamp_scale(bigru(pv, f"block{index}.s2", z1), top.scale_clamp)
    t2 = bigru(pv, f"block{index}.t2", z1)
    z2 = y2 * s2.exp() + t2
    logdet = s1.sum(axis=2) + s2.sum(axis=2)
    return _merge_dims(top, z1, z2, index), logdet


def coupling_inverse(top: FlowTopology, pv: dict, index: int, z: Var) -> Var:
    """Exact algebraic inverse: recover the passive half first."""
    p_active, p_passive = top.block_parts(index)
    z1 = _take_dims(z, p_active)
    z2 = _take_dims(z, p_passive)
    s2 = _clamp_scale(bigru(pv, f"block{index}.s2", z1), top.scale_clamp)
    t2 = bigru(pv, f"block{index}.t2", z1)
    y2 = (z2 - t2) * (-s2).exp()
    s1 = _clamp_scale(bigru(pv, f"block{index}.s1", y2), top.scale_clamp)
    t1 = bigru(pv, f"block{index}.t1", y2)
    y1 = (z1 - t1) * (-s1).exp()
    return _merge_dims(top, y1, y2, index)


def flow_forward(top: FlowTopology, pv: dict, y: Var):
    """All blocks; returns (z, per-step log-det summed over blocks)."""
    logdet = None
    z = y
    for i in range(top.num_blocks):
        z, ld = coupling_forward(top, pv, i, z)
        logdet = ld if logdet is None else logdet + ld
    return z, logdet


def flow_inverse(top: FlowTopology, pv: dict, z: Var) -> Var:
    y = z
    for i in range(top.num_blocks - 1, -1, -1):
        y = coupling_inverse(top, pv, i, y)
    return y


# ---------------------------------------------------------------------------
# priors


def gp_kernel(horizon: int, sigma_f: float = 1.0, length_scale: float = 1.0):
    """Squared-exponential kernel over unit-spaced step indices, with jitter."""
    if horizon < 2:
        raise ValueError("kernel needs at least 2 steps")
    if sigma_f <= 0 or length_scale <= 0:
        raise ValueError("kernel hyperparameters must be positive")
    x = np.arange(horizon, dtype=float)
    diff = x[:, None] - x[None, :]
    kernel = sigma_f**2 * np.exp(-(diff**2) / (2.0 * length_scale**2))
    return kernel


def _factorize_kernel(kernel: np.ndarray):
    jittered = kernel + 1e-6 * np.eye(kernel.shape[0])
    try:
        chol = np.linalg.cholesky(jittered)
    except np.linalg.LinAlgError as exc:
        raise ValueError("kernel not positive definite after jitter") from exc
    inv = np.linalg.inv(jittered)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return chol, inv, logdet


def nll_iid(top: FlowTopology, pv: dict, y: Var) -> Var:
    """Mean per-trajectory NLL under the i.i.d. standard-Gaussian prior."""
    z, logdet = flow_forward(top, pv, y)
    T, B, D = z.shape
    logp = (z.square().sum(axis=2) * (-0.5)) - 0.5 * D * np.log(2.0 * np.pi)
    total = -(logp + logdet).sum()
    return total * (1.0 / B)


def nll_gp(
    top: FlowTopology, pv: dict, y: Var, kernel_inv: np.ndarray, kernel_logdet: float
) -> Var:
    """Mean NLL under the temporally correlated prior, per latent dimension."""
    z, logdet = flow_forward(top, pv, y)
    T, B, D = z.shape
    flat = z.reshape(T, B * D)
    quad = (flat * (Var(kernel_inv) @ flat)).sum() * 0.5
    const = 0.5 * B * D * (kernel_logdet + T * np.log(2.0 * np.pi))
    total = quad + const - logdet.sum()
    return total * (1.0 / B)


# ---------------------------------------------------------------------------
# estimator


class RealNVPFlow(BaseEstimator, TransformerMixin):
    """Density model over same-length local trajectories.

    fit() trains by gradient descent on the negative log-likelihood;
    transform()/inverse_transform() map trajectories to latents and back.
    """

    def __init__(
        self,
        num_blocks=4,
        hidden=32,
        prior="gp",
        epochs=2000,
        lr=1e-3,
        scale_clamp=3.0,
        sigma_f=1.0,
        length_scale=1.0,
        normalize=True,
        seed=0,
    ):
        self.num_blocks = num_blocks
        self.hidden = hidden
        self.prior = prior
        self.epochs = epochs
        self.lr = lr
        self.scale_clamp = scale_clamp
        self.sigma_f = sigma_f
        self.length_scale = length_scale
        self.normalize = normalize
        self.seed = seed

    # -- helpers ------------------------------------------------------------

    def _stack(self, trajs) -> np.ndarray:
        arr = np.stack([t.points for t in trajs], axis=1)  # T x N x D
        if arr.shape[0] != self.topology_.horizon or arr.shape[2] != self.topology_.dim:
            raise ValueError("trajectory shape does not match fitted model")
        return arr

    def _normalize(self, arr: np.ndarray) -> np.ndarray:
        if not self.normalize:
            return arr
        return (arr - self.mu_[:, None, :]) / self.sigma_[None, None, :]

    def _denormalize(self, arr: np.ndarray) -> np.ndarray:
        if not self.normalize:
            return arr
        return arr * self.sigma_[None, None, :] + self.mu_[:, None, :]

    def _loss(self, pv: dict, y: Var) -> Var:
        if self.topology_.prior == "gp":
            return nll_gp(self.topology_, pv, y, self.kernel_inv_, self.kernel_logdet_)
        return nll_iid(self.topology_, pv, y)

    # -- fitting ------------------------------------------------------------

    def fit(self, trajectories, y=None):
        trajs = list(trajectories)
        if len(trajs) < 1:
            raise ValueError("need at least one trajectory")
        horizon, dim = trajs[0].points.shape
        self.topology_ = FlowTopology(
            dim=dim,
            horizon=horizon,
            num_blocks=self.num_blocks,
            hidden=self.hidden,
            prior=self.prior,
            scale_clamp=self.scale_clamp,
            sigma_f=self.sigma_f,
            length_scale=self.length_scale,
        )
        stack = np.stack([t.points for t in trajs], axis=1)  # T x N x D
        if self.normalize:
            self.mu_ = stack.mean(axis=1)  # T x D
            spread = stack.std(axis=(0, 1))
            self.sigma_ = np.maximum(spread, 1e-3)  # D
        else:
            self.mu_ = np.zeros((horizon, dim))
            self.sigma_ = np.ones(dim)
        kernel = gp_kernel(horizon, self.sigma_f, self.length_scale)
        _, self.kernel_inv_, self.kernel_logdet_ = _factorize_kernel(kernel)

        rng = np.random.default_rng(self.seed)
        params = init_flow_params(self.topology_, rng)
        data = self._normalize(stack)
        optim = Adam(params, lr=self.lr)
        best_loss = np.inf
        best = params.copy()
        history = []
        for epoch in range(self.epochs):
            pv = params.as_vars()
            loss = self._loss(pv, Var(data))
            if not np.isfinite(loss.data):
                raise FloatingPointError(
                    f"flow training diverged at epoch {epoch} (loss={loss.data})"
                )
            backward(loss)
            history.append(float(loss.data))
            if history[-1] < best_loss:
                best_loss = history[-1]
                best = params.copy()
            optim.step(params, collect_grads(pv))
        # evaluate the final parameters too
        final = float(self._loss(params.as_vars(), Var(data)).data)
        history.append(final)
        if final < best_loss:
            best_loss, best = final, params.copy()
        self.params_ = best
        self.loss_history_ = history
        self.best_loss_ = best_loss
        return self

    # -- inference ----------------------------------------------------------

    def transform(self, trajectories):
        """Encode trajectories into latent T x D arrays."""
        arr = self._normalize(self._stack(trajectories))
        z, _ = flow_forward(self.topology_, self.params_.as_vars(), Var(arr))
        return [z.data[:, i, :].copy() for i in range(z.data.shape[1])]

    def inverse_transform(self, latents):
        """Decode latent T x D arrays back into local trajectories."""
        arr = np.stack([np.asarray(z, dtype=float) for z in latents], axis=1)
        y = flow_inverse(self.topology_, self.params_.as_vars(), Var(arr))
        out = self._denormalize(y.data)
        return [Trajectory(out[:, i, :].copy()) for i in range(out.shape[1])]

    def decode_latent(self, latent) -> Trajectory:
        return self.inverse_transform([latent])[0]

    def mean_latent(self) -> np.ndarray:
        top = self.topology_
        return np.zeros((top.horizon, top.dim))

    def sample_latent(self, rng) -> np.ndarray:
        top = self.topology_
        eps = rng.standard_normal((top.horizon, top.dim))
        if top.prior == "iid":
            return eps
        kernel = gp_kernel(top.horizon, top.sigma_f, top.length_scale)
        chol, _, _ = _factorize_kernel(kernel)
        return chol @ eps

    def score(self, trajectories) -> float:
        """Mean per-trajectory negative log-likelihood (lower is better)."""
        arr = self._normalize(self._stack(trajectories))
        return float(self._loss(self.params_.as_vars(), Var(arr)).data)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": FLOW_SCHEMA_VERSION,
            "topology": {
                "dim": self.topology_.dim,
                "horizon": self.topology_.horizon,
                "num_blocks": self.topology_.num_blocks,
                "hidden": self.topology_.hidden,
                "prior": self.topology_.prior,
                "scale_clamp": self.topology_.scale_clamp,
                "sigma_f": self.topology_.sigma_f,
                "length_scale": self.topology_.length_scale,
            },
            "normalize": self.normalize,
            "mu": self.mu_.tolist(),
            "sigma": self.sigma_.tolist(),
            "params": self.params_.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RealNVPFlow":
        if data.get("schema") != FLOW_SCHEMA_VERSION:
            raise ValueError(f"unsupported flow schema: {data.get('schema')!r}")
        topo = data["topology"]
        model = cls(
            num_blocks=topo["num_blocks"],
            hidden=topo["hidden"],
            prior=topo["prior"],
            scale_clamp=topo["scale_clamp"],
            sigma_f=topo["sigma_f"],
            length_scale=topo["length_scale"],
            normalize=data["normalize"],
        )
        model.topology_ = FlowTopology(**topo)
        model.mu_ = np.array(data["mu"])
        model.sigma_ = np.array(data["sigma"])
        model.params_ = ParamStore.from_dict(data["params"])
        kernel = gp_kernel(topo["horizon"], topo["sigma_f"], topo["length_scale"])
        _, model.kernel_inv_, model.kernel_logdet_ = _factorize_kernel(kernel)
        return model

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "RealNVPFlow":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
