"""Task-parameterized GMM baselines with precision-weighted frame fusion.

Each local frame gets a Gaussian mixture over joint (time, local position)
points; retrieval conditions every mixture on time, maps the resulting
Gaussians into the global space through the query frames, and fuses them
with a precision-weighted product. The alpha variant rescales each
frame's precision by variance-sensitivity weights recomputed
per timestep from the conditioned covariances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.cluster import kmeans_plusplus

from .geometry import Dataset, TaskQuery, Trajectory, local_sets, variance_profile

TPGMM_SCHEMA_VERSION = 1

_JITTER = 1e-8


@dataclass
class LocalGMM:
    """Mixture over joint (time, position) points in one local frame."""

    priors: np.ndarray  # M
    means: np.ndarray  # M x (1+D)
    covariances: np.ndarray  # M x (1+D) x (1+D)

    @property
    def n_components(self) -> int:
        return self.priors.shape[0]


def _log_gaussian(points, mean, cov):
    dim = mean.shape[0]
    chol = np.linalg.cholesky(cov)
    diff = points - mean
    solved = np.linalg.solve(chol, diff.T)
    quad = (solved**2).sum(axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (quad + logdet + dim * np.log(2.0 * np.pi))


def _em_once(points, n_components, rng, max_iter, tol):
    n, dim = points.shape
    centers, _ = kmeans_plusplus(
        points, n_components, random_state=int(rng.integers(2**31 - 1))
    )
    priors = np.full(n_components, 1.0 / n_components)
    means = centers.astype(float)
    base_cov = np.cov(points.T) + _JITTER * np.eye(dim)
    covs = np.stack([base_cov.copy() for _ in range(n_components)])
    log_liks = []
    prev = -np.inf
    for _ in range(max_iter):
        log_resp = np.stack(
            [
                np.log(priors[m]) + _log_gaussian(points, means[m], covs[m])
                for m in range(n_components)
            ],
            axis=1,
        )
        norm = logsumexp(log_resp, axis=1)
        log_lik = float(norm.sum())
        log_liks.append(log_lik)
        resp = np.exp(log_resp - norm[:, None])
        weights = resp.sum(axis=0)
        if np.any(weights < 1e-8):
            raise FloatingPointError("component collapsed")
        priors = weights / n
        means = (resp.T @ points) / weights[:, None]
        for m in range(n_components):
            diff = points - means[m]
            covs[m] = (resp[:, m][:, None] * diff).T @ diff / weights[m]
            covs[m] += _JITTER * np.eye(dim)
            np.linalg.cholesky(covs[m])  # PD or raise
        if log_lik - prev < tol and np.isfinite(prev):
            break
        prev = log_lik
    return LocalGMM(priors, means, covs), log_liks


def fit_em(points, n_components, seed=0, max_iter=200, tol=1e-6, n_restarts=5):
    """EM fit with k-means++ seeding and best-of-restarts selection."""
    points = np.asarray(points, dtype=float)
    if points.shape[0] < 10 * n_components:
        raise ValueError(
            f"need at least {10 * n_components} points for {n_components} components"
        )
    rng = np.random.default_rng(seed)
    best = None
    best_lik = -np.inf
    failures = 0
    for _ in range(n_restarts):
        try:
            gmm, log_liks = _em_once(points, n_components, rng, max_iter, tol)
        except (FloatingPointError, np.linalg.LinAlgError):
            failures += 1
            continue
        if log_liks[-1] > best_lik:
            best_lik = log_liks[-1]
            best = (gmm, log_liks)
    if best is None:
        raise RuntimeError(f"EM failed in all {n_restarts} restarts ({failures} collapses)")
    return best


def condition_on_time(gmm: LocalGMM, t: float):
    """Moment-matched Gaussian over position given the time input."""
    M = gmm.n_components
    log_h = np.empty(M)
    cond_means = []
    cond_covs = []
    for m in range(M):
        mean, cov = gmm.means[m], gmm.covariances[m]
        stt = cov[0, 0]
        sxt = cov[1:, 0]
        sxx = cov[1:, 1:]
        gain = sxt / stt
        cond_means.append(mean[1:] + gain * (t - mean[0]))
        cond_covs.append(sxx - np.outer(gain, sxt))
        log_h[m] = (
            np.log(gmm.priors[m])
            - 0.5 * ((t - mean[0]) ** 2 / stt + np.log(2.0 * np.pi * stt))
        )
    h = np.exp(log_h - logsumexp(log_h))
    mean = sum(h[m] * cond_means[m] for m in range(M))
    cov = sum(
        h[m] * (cond_covs[m] + np.outer(cond_means[m], cond_means[m])) for m in range(M)
    ) - np.outer(mean, mean)
    cov = 0.5 * (cov + cov.T) + _JITTER * np.eye(cov.shape[0])
    return mean, cov


def gaussian_product(means, covariances, alphas=None):
    """Precision-weighted product of K Gaussians, precisions scaled by alpha."""
    K = len(means)
    if alphas is None:
        alphas = np.ones(K)
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas <= 0):
        raise ValueError("alpha weights must be positive")
    dim = means[0].shape[0]
    precision = np.zeros((dim, dim))
    weighted = np.zeros(dim)
    for k in range(K):
        prec_k = alphas[k] * np.linalg.inv(covariances[k])
        precision += prec_k
        weighted += prec_k @ means[k]
    cov = np.linalg.inv(precision)
    return cov @ weighted, 0.5 * (cov + cov.T)


def alpha_weights(covariances, gamma: float):
    """Variance-sensitivity weights from Frobenius norms of matrix powers."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    norms = []
    for cov in covariances:
        vals, vecs = np.linalg.eigh(np.asarray(cov, dtype=float))
        if np.any(vals <= 0):
            raise ValueError("covariance must be positive definite")
        powered = (vecs * vals ** (-gamma)) @ vecs.T
        norms.append(np.linalg.norm(powered))
    norms = np.asarray(norms)
    return norms / norms.sum()


class TPGMM(BaseEstimator):
    """TP-GMM trajectory generator; variant="alpha" adds variance-sensitive
    frame reweighting."""

    def __init__(
        self,
        n_components=6,
        variant="plain",
        gamma=None,
        gamma_grid=(0.0, 0.5, 1.0, 2.0, 4.0, 8.0),
        n_restarts=5,
        max_iter=200,
        tol=1e-6,
        epsilon=0.01,
        seed=0,
    ):
        self.n_components = n_components
        self.variant = variant
        self.gamma = gamma
        self.gamma_grid = gamma_grid
        self.n_restarts = n_restarts
        self.max_iter = max_iter
        self.tol = tol
        self.epsilon = epsilon
        self.seed = seed

    def fit(self, dataset: Dataset, y=None):
        if self.variant not in ("plain", "alpha"):
            raise ValueError(f"unknown variant {self.variant!r}")
        self.num_frames_ = dataset.num_frames
        self.dim_ = dataset.dim
        self.horizon_ = dataset.horizon
        times = np.arange(dataset.horizon) / (dataset.horizon - 1)
        self.gmms_ = []
        for k, trajs in enumerate(local_sets(dataset)):
            joint = np.concatenate(
                [
                    np.concatenate([times[:, None], t.points], axis=1)
                    for t in trajs
                ]
            )
            gmm, _ = fit_em(
                joint,
                self.n_components,
                seed=self.seed + 17 * (k + 1),
                max_iter=self.max_iter,
                tol=self.tol,
                n_restarts=self.n_restarts,
            )
            self.gmms_.append(gmm)
        if self.variant == "alpha":
            self.gamma_ = (
                self.gamma if self.gamma is not None else self._select_gamma(dataset)
            )
        else:
            self.gamma_ = 0.0
        return self

    def _select_gamma(self, dataset: Dataset) -> float:
        """Grid search minimizing the variance-weighted reproduction cost."""
        grid = sorted(self.gamma_grid)
        if not grid:
            raise ValueError("gamma grid is empty")
        profile = variance_profile(local_sets(dataset), epsilon=self.epsilon)
        best_gamma, best_cost = grid[0], np.inf
        for gamma in grid:
            cost = 0.0
            for demo in dataset.demos:
                gen = self._generate(demo.query, gamma)
                err = ((demo.trajectory.points - gen.points) ** 2).sum(axis=1)
                cost += float((profile.w * err).sum())
            if cost < best_cost - 1e-12:
                best_cost, best_gamma = cost, gamma
        return best_gamma

    def _generate(self, query: TaskQuery, gamma: float) -> Trajectory:
        if query.num_frames != self.num_frames_:
            raise ValueError(
                f"query has {query.num_frames} frames, model expects {self.num_frames_}"
            )
        times = np.arange(self.horizon_) / (self.horizon_ - 1)
        out = np.empty((self.horizon_, self.dim_))
        alpha_track = np.empty((self.horizon_, self.num_frames_))
        for i, t in enumerate(times):
            means, covs = [], []
            for k, frame in enumerate(query.frames):
                mu, cov = condition_on_time(self.gmms_[k], t)
                means.append(frame.rotation @ mu + frame.translation)
                covs.append(frame.rotation @ cov @ frame.rotation.T)
            if self.variant == "alpha" and gamma > 0:
                alphas = alpha_weights(covs, gamma)
            else:
                alphas = np.full(self.num_frames_, 1.0)
            alpha_track[i] = alphas / alphas.sum()
            out[i], _ = gaussian_product(means, covs, alphas)
        self.last_alpha_track_ = alpha_track
        return Trajectory(out)

    def predict(self, query: TaskQuery) -> Trajectory:
        return self._generate(query, getattr(self, "gamma_", 0.0))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": TPGMM_SCHEMA_VERSION,
            "kind": "tpgmm",
            "num_frames": self.num_frames_,
            "dim": self.dim_,
            "horizon": self.horizon_,
            "hyper": self.get_params(),
            "gamma": self.gamma_,
            "frames": [
                {
                    "priors": g.priors.tolist(),
                    "means": g.means.tolist(),
                    "covariances": g.covariances.tolist(),
                }
                for g in self.gmms_
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TPGMM":
        if data.get("schema") != TPGMM_SCHEMA_VERSION:
            raise ValueError(f"unsupported tpgmm schema: {data.get('schema')!r}")
        hyper = dict(data["hyper"])
        hyper["gamma_grid"] = tuple(hyper["gamma_grid"])
        model = cls(**hyper)
        model.num_frames_ = data["num_frames"]
        model.dim_ = data["dim"]
        model.horizon_ = data["horizon"]
        model.gamma_ = data["gamma"]
        model.gmms_ = [
            LocalGMM(
                np.array(g["priors"]),
                np.array(g["means"]),
                np.array(g["covariances"]),
            )
            for g in data["frames"]
        ]
        return model

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "TPGMM":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
