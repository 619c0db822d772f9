"""Recurrent shift-attention over local frames, and the full generators.

The attention net is a unidirectional GRU over a query-independent input
sequence (the per-frame latent points plus normalized time) followed by a
linear head and a per-step softmax over the K frames. Generation blends
the per-frame decoded local trajectories, re-expressed in the global
space, with these weights; because no network ever sees the task query,
the whole generator is exactly equivariant under rigid transforms of the
query frames.
"""

from __future__ import annotations

import json

import numpy as np
from scipy.special import xlogy
from sklearn.base import BaseEstimator

from .diffcore import (
    Adam,
    ParamStore,
    Var,
    as_var,
    backward,
    collect_grads,
    dense,
    gru_sequence,
    init_dense,
    init_gru,
    softmax,
)
from .flow import RealNVPFlow
from .geometry import (
    Dataset,
    FrameVarianceProfile,
    TaskQuery,
    Trajectory,
    local_sets,
    to_global,
    variance_profile,
)

BUNDLE_SCHEMA_VERSION = 1


def plogp(x) -> Var:
    """x * log(x) with the 0 * log 0 = 0 convention, differentiable for x > 0."""
    x = as_var(x)
    value = xlogy(x.data, x.data)
    grad_factor = np.where(x.data > 0, np.log(np.where(x.data > 0, x.data, 1.0)) + 1.0, 0.0)
    return Var(value, (x,), lambda g: (g * grad_factor,))


# ---------------------------------------------------------------------------
# costs (Var in, Var out; plain arrays are promoted)


def cost_reprod(demos, generated, profile: FrameVarianceProfile) -> Var:
    """Variance-weighted squared reproduction error, summed over demos/steps."""
    demos = as_var(demos)
    generated = as_var(generated)
    if demos.data.ndim == 2:
        demos = demos.reshape(1, *demos.data.shape)
    if generated.data.ndim == 2:
        generated = generated.reshape(1, *generated.data.shape)
    err = (demos - generated).square().sum(axis=2)  # N x T
    return (err * profile.w[None, :]).sum()


def _as_attention(attn) -> Var:
    attn = as_var(attn)
    if attn.data.ndim == 2:
        attn = attn.reshape(1, *attn.data.shape)
    rows = attn.data.sum(axis=2)
    if np.any(np.abs(rows - 1.0) > 1e-6) or np.any(attn.data < -1e-12):
        raise ValueError("attention rows must lie on the K-simplex")
    return attn


def cost_traj(attn) -> Var:
    """Entropy gap of the time-averaged attention: 0 when uniform, log K one-hot."""
    attn = _as_attention(attn)
    _, _, K = attn.data.shape
    avg = attn.mean(axis=1)  # N x K
    return np.log(K) + plogp(avg).sum(axis=1).mean()


def cost_point(attn) -> Var:
    """Mean per-step attention entropy: 0 when one-hot, log K when uniform."""
    attn = _as_attention(attn)
    return -(plogp(attn).sum(axis=2).mean())


def cost_dist(attn, w_traj: float = 10.0, w_point: float = 1.0) -> Var:
    return cost_traj(attn) * w_traj + cost_point(attn) * w_point


def cost_smooth(generated) -> Var:
    """Mean (over demos) summed squared step displacement."""
    generated = as_var(generated)
    if generated.data.ndim == 2:
        generated = generated.reshape(1, *generated.data.shape)
    N, T, _ = generated.data.shape
    diff = generated[:, 1:, :] - generated[:, : T - 1, :]
    return diff.square().sum() * (1.0 / N)


def combine(weights, decoded) -> Trajectory:
    """Per-step convex combination of K global trajectories."""
    w = np.asarray(weights, dtype=float)
    if np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-6) or np.any(w < -1e-6):
        raise ValueError("weights must lie on the K-simplex at every step")
    stack = np.stack([t.points for t in decoded], axis=1)  # T x K x D
    if w.shape != stack.shape[:2]:
        raise ValueError(f"weights shape {w.shape} does not match {stack.shape[:2]}")
    return Trajectory((w[:, :, None] * stack).sum(axis=1))


# ---------------------------------------------------------------------------
# attention net


def init_attention_params(num_frames: int, dim: int, hidden: int, rng) -> ParamStore:
    store = ParamStore()
    init_gru(store, "gru", num_frames * dim + 1, hidden, rng)
    init_dense(store, "head", hidden, num_frames, rng, zero=True)
    return store


def attention_input(latents, horizon: int) -> np.ndarray:
    """(T, 1, K*D+1) net input: per-frame latent points plus t/T."""
    flat = np.concatenate([np.asarray(z, dtype=float) for z in latents], axis=1)
    time = np.arange(horizon)[:, None] / horizon
    return np.concatenate([flat, time], axis=1)[:, None, :]


def attention_forward(pv: dict, inputs: np.ndarray) -> Var:
    h = gru_sequence(pv, "gru", Var(inputs))
    T = inputs.shape[0]
    logits = dense(pv, "head", h.reshape(T, -1))
    return softmax(logits, axis=1)  # T x K


def attention_weights(params: ParamStore, latents, horizon: int) -> np.ndarray:
    return attention_forward(
        params.as_vars(), attention_input(latents, horizon)
    ).data.copy()


# ---------------------------------------------------------------------------
# shared generator machinery


class _ShiftAttentionBase(BaseEstimator):
    """Common fit/predict plumbing for the flow-backed and linear variants."""

    def _train_attention(self, dataset: Dataset, decoded_locals, latents):
        """decoded_locals: K local Trajectory decoded under the mean policy."""
        K, D, T = dataset.num_frames, dataset.dim, dataset.horizon
        sets = local_sets(dataset)
        self.profile_ = variance_profile(sets, epsilon=self.epsilon)

        # constants w.r.t. attention parameters
        globals_per_demo = np.stack(
            [
                np.stack(
                    [
                        to_global(decoded_locals[k], demo.query.frames[k]).points
                        for k in range(K)
                    ],
                    axis=1,
                )  # T x K x D
                for demo in dataset.demos
            ]
        )  # N x T x K x D
        demo_stack = np.stack([d.trajectory.points for d in dataset.demos])  # N x T x D
        inputs = attention_input(latents, T)

        rng = np.random.default_rng(self.seed)
        params = init_attention_params(K, D, self.attn_hidden, rng)
        optim = Adam(params, lr=self.attn_lr)
        best_loss, best = np.inf, params.copy()
        history = []
        for epoch in range(self.attn_epochs):
            pv = params.as_vars()
            attn = attention_forward(pv, inputs)  # T x K
            generated = (attn.reshape(1, T, K, 1) * globals_per_demo).sum(axis=2)
            # The reproduction cost sums over demos and steps; averaging it
            # keeps it on the same O(1) scale as the entropy terms so the
            # schedule sharpens instead of staying uniformly soft.
            n_demos = demo_stack.shape[0]
            loss = (
                cost_reprod(demo_stack, generated, self.profile_) / (n_demos * T)
                + cost_dist(attn, self.w_traj, self.w_point)
                + cost_smooth(generated) * self.w_smooth
            )
            if not np.isfinite(loss.data):
                raise FloatingPointError(
                    f"attention training diverged at epoch {epoch}"
                )
            backward(loss)
            history.append(float(loss.data))
            if history[-1] < best_loss:
                best_loss, best = history[-1], params.copy()
            optim.step(params, collect_grads(pv))
        self.attn_params_ = best
        self.attn_history_ = history
        self.attn_best_loss_ = best_loss

    def _decoded_locals(self, policy: str, seed):
        raise NotImplementedError

    def _mean_latents(self):
        raise NotImplementedError

    def predict(self, query: TaskQuery, policy: str = "mean", seed=None):
        """Generate a global trajectory (and the T x K attention weights)."""
        if query.num_frames != self.num_frames_:
            raise ValueError(
                f"query has {query.num_frames} frames, model expects {self.num_frames_}"
            )
        decoded, latents = self._decoded_locals(policy, seed)
        weights = attention_weights(self.attn_params_, latents, self.horizon_)
        decoded_global = [
            to_global(decoded[k], query.frames[k]) for k in range(self.num_frames_)
        ]
        return combine(weights, decoded_global), weights


class SALAT(_ShiftAttentionBase):
    """Flow-backed generator: one recurrent RealNVP per local frame plus the
    shift-attention model."""

    def __init__(
        self,
        flow_blocks=4,
        flow_hidden=32,
        flow_epochs=2000,
        flow_lr=1e-3,
        flow_prior="gp",
        attn_hidden=32,
        attn_epochs=3000,
        attn_lr=1e-3,
        w_traj=10.0,
        w_point=1.0,
        w_smooth=1.0,
        epsilon=0.01,
        seed=0,
    ):
        self.flow_blocks = flow_blocks
        self.flow_hidden = flow_hidden
        self.flow_epochs = flow_epochs
        self.flow_lr = flow_lr
        self.flow_prior = flow_prior
        self.attn_hidden = attn_hidden
        self.attn_epochs = attn_epochs
        self.attn_lr = attn_lr
        self.w_traj = w_traj
        self.w_point = w_point
        self.w_smooth = w_smooth
        self.epsilon = epsilon
        self.seed = seed

    def fit(self, dataset: Dataset, y=None):
        self.num_frames_ = dataset.num_frames
        self.dim_ = dataset.dim
        self.horizon_ = dataset.horizon
        sets = local_sets(dataset)
        self.flows_ = []
        for k, trajs in enumerate(sets):
            flow = RealNVPFlow(
                num_blocks=self.flow_blocks,
                hidden=self.flow_hidden,
                prior=self.flow_prior,
                epochs=self.flow_epochs,
                lr=self.flow_lr,
                seed=self.seed + 1000 * (k + 1),
            )
            flow.fit(trajs)
            self.flows_.append(flow)
        # Mean-latent policy: the latent space is unimodal, so select the
        # latent trajectory closest to the pooled latent mean. Scoring is
        # pooled across frames so all anchors come from the same
        # demonstration and stay mode-consistent; by invertibility they
        # decode to that demonstration exactly.
        per_frame = [np.asarray(flow.transform(trajs)) for flow, trajs in zip(self.flows_, sets)]
        means = [z.mean(axis=0) for z in per_frame]
        scores = sum(((z - m[None]) ** 2).sum(axis=(1, 2)) for z, m in zip(per_frame, means))
        pick = int(np.argmin(scores))
        self.mean_latents_ = [z[pick] for z in per_frame]
        decoded = [flow.decode_latent(z) for flow, z in zip(self.flows_, self.mean_latents_)]
        self._train_attention(dataset, decoded, self.mean_latents_)
        return self

    def _mean_latents(self):
        return self.mean_latents_

    def _decoded_locals(self, policy, seed):
        if policy == "mean":
            latents = self._mean_latents()
        elif policy == "sample":
            rng = np.random.default_rng(seed)
            latents = [flow.sample_latent(rng) for flow in self.flows_]
        else:
            raise ValueError(f"unknown latent policy {policy!r}")
        decoded = [flow.decode_latent(z) for flow, z in zip(self.flows_, latents)]
        return decoded, latents

    def to_dict(self) -> dict:
        return {
            "schema": BUNDLE_SCHEMA_VERSION,
            "kind": "salat",
            "num_frames": self.num_frames_,
            "dim": self.dim_,
            "horizon": self.horizon_,
            "hyper": self.get_params(),
            "flows": [flow.to_dict() for flow in self.flows_],
            "mean_latents": [z.tolist() for z in self.mean_latents_],
            "attention": self.attn_params_.to_dict(),
            "attn_hidden": self.attn_hidden,
            "profile": {
                "v": self.profile_.v.tolist(),
                "w": self.profile_.w.tolist(),
                "epsilon": self.profile_.epsilon,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SALAT":
        if data.get("schema") != BUNDLE_SCHEMA_VERSION:
            raise ValueError(f"unsupported bundle schema: {data.get('schema')!r}")
        model = cls(**data["hyper"])
        model.num_frames_ = data["num_frames"]
        model.dim_ = data["dim"]
        model.horizon_ = data["horizon"]
        model.flows_ = [RealNVPFlow.from_dict(f) for f in data["flows"]]
        model.mean_latents_ = [np.array(z) for z in data["mean_latents"]]
        model.attn_params_ = ParamStore.from_dict(data["attention"])
        prof = data["profile"]
        model.profile_ = FrameVarianceProfile(
            v=np.array(prof["v"]), w=np.array(prof["w"]), epsilon=prof["epsilon"]
        )
        return model


class SALIT(_ShiftAttentionBase):
    """Linear simplification: per-frame mean local trajectories stand in for
    the flows; only the attention model is learned."""

    def __init__(
        self,
        attn_hidden=32,
        attn_epochs=3000,
        attn_lr=1e-3,
        w_traj=10.0,
        w_point=1.0,
        w_smooth=1.0,
        epsilon=0.01,
        seed=0,
    ):
        self.attn_hidden = attn_hidden
        self.attn_epochs = attn_epochs
        self.attn_lr = attn_lr
        self.w_traj = w_traj
        self.w_point = w_point
        self.w_smooth = w_smooth
        self.epsilon = epsilon
        self.seed = seed

    def fit(self, dataset: Dataset, y=None):
        self.num_frames_ = dataset.num_frames
        self.dim_ = dataset.dim
        self.horizon_ = dataset.horizon
        sets = local_sets(dataset)
        self.frame_means_ = []
        self.frame_stds_ = []
        for trajs in sets:
            stack = np.stack([t.points for t in trajs])
            self.frame_means_.append(stack.mean(axis=0))
            self.frame_stds_.append(stack.std(axis=0, ddof=1))
        decoded = [Trajectory(m) for m in self.frame_means_]
        latents = [np.zeros((self.horizon_, self.dim_)) for _ in range(dataset.num_frames)]
        self._train_attention(dataset, decoded, latents)
        return self

    def _mean_latents(self):
        return [np.zeros((self.horizon_, self.dim_)) for _ in range(self.num_frames_)]

    def _decoded_locals(self, policy, seed):
        latents = self._mean_latents()
        if policy == "mean":
            decoded = [Trajectory(m) for m in self.frame_means_]
        elif policy == "sample":
            rng = np.random.default_rng(seed)
            decoded = [
                Trajectory(m + rng.standard_normal(m.shape) * s)
                for m, s in zip(self.frame_means_, self.frame_stds_)
            ]
        else:
            raise ValueError(f"unknown latent policy {policy!r}")
        return decoded, latents

    def to_dict(self) -> dict:
        return {
            "schema": BUNDLE_SCHEMA_VERSION,
            "kind": "salit",
            "num_frames": self.num_frames_,
            "dim": self.dim_,
            "horizon": self.horizon_,
            "hyper": self.get_params(),
            "frame_means": [m.tolist() for m in self.frame_means_],
            "frame_stds": [s.tolist() for s in self.frame_stds_],
            "attention": self.attn_params_.to_dict(),
            "profile": {
                "v": self.profile_.v.tolist(),
                "w": self.profile_.w.tolist(),
                "epsilon": self.profile_.epsilon,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SALIT":
        if data.get("schema") != BUNDLE_SCHEMA_VERSION:
            raise ValueError(f"unsupported bundle schema: {data.get('schema')!r}")
        model = cls(**data["hyper"])
        model.num_frames_ = data["num_frames"]
        model.dim_ = data["dim"]
        model.horizon_ = data["horizon"]
        model.frame_means_ = [np.array(m) for m in data["frame_means"]]
        model.frame_stds_ = [np.array(s) for s in data["frame_stds"]]
        model.attn_params_ = ParamStore.from_dict(data["attention"])
        prof = data["profile"]
        model.profile_ = FrameVarianceProfile(
            v=np.array(prof["v"]), w=np.array(prof["w"]), epsilon=prof["epsilon"]
        )
        return model


def save_bundle(model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh)


def load_bundle(path):
    with open(path) as fh:
        data = json.load(fh)
    kind = data.get("kind")
    if kind == "salat":
        return SALAT.from_dict(data)
    if kind == "salit":
        return SALIT.from_dict(data)
    raise ValueError(f"unknown bundle kind {kind!r}")
