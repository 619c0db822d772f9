"""Frames, trajectories, local/global transforms and variance statistics.

All trajectories are plain T x D float arrays wrapped in :class:`Trajectory`.
A :class:`Frame` is the rigid pose (rotation A, translation b) of a local
coordinate system expressed in the global space; local coordinates of a
global point y are ``A.T @ (y - b)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_array, check_points, check_rotation

DATASET_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Trajectory:
    """Fixed-length sequence of D-dimensional points."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", check_points(self.points))

    @property
    def horizon(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Frame:
    """Rigid local frame: rotation (proper, orthonormal) plus translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = check_rotation(self.rotation)
        trans = as_float_array(self.translation, "translation").reshape(-1)
        if trans.shape[0] != rot.shape[0]:
            raise ValueError(
                f"translation dim {trans.shape[0]} != rotation dim {rot.shape[0]}"
            )
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @property
    def dim(self) -> int:
        return self.translation.shape[0]

    @staticmethod
    def identity(dim: int) -> "Frame":
        return Frame(np.eye(dim), np.zeros(dim))

    @staticmethod
    def from_angle(angle: float, translation) -> "Frame":
        """2D frame whose x-axis points along `angle` (radians)."""
        c, s = np.cos(angle), np.sin(angle)
        return Frame(np.array([[c, -s], [s, c]]), translation)


@dataclass(frozen=True)
class TaskQuery:
    """Ordered list of K local frames defining one task instance."""

    frames: tuple

    def __post_init__(self):
        frames = tuple(self.frames)
        if len(frames) < 1:
            raise ValueError("a task query needs at least one frame")
        dims = {f.dim for f in frames}
        if len(dims) != 1:
            raise ValueError(f"frames have inconsistent dimensions: {sorted(dims)}")
        object.__setattr__(self, "frames", frames)

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def dim(self) -> int:
        return self.frames[0].dim


@dataclass(frozen=True)
class Demonstration:
    query: TaskQuery
    trajectory: Trajectory

    def __post_init__(self):
        if self.query.dim != self.trajectory.dim:
            raise ValueError(
                f"trajectory dim {self.trajectory.dim} != frame dim {self.query.dim}"
            )


@dataclass(frozen=True)
class Dataset:
    demos: tuple

    def __post_init__(self):
        demos = tuple(self.demos)
        if not demos:
            raise ValueError("dataset is empty")
        k0, d0, t0 = (
            demos[0].query.num_frames,
            demos[0].trajectory.dim,
            demos[0].trajectory.horizon,
        )
        for demo in demos[1:]:
            if (
                demo.query.num_frames != k0
                or demo.trajectory.dim != d0
                or demo.trajectory.horizon != t0
            ):
                raise ValueError("all demonstrations must share K, D and T")
        object.__setattr__(self, "demos", demos)

    @property
    def num_demos(self) -> int:
        return len(self.demos)

    @property
    def num_frames(self) -> int:
        return self.demos[0].query.num_frames

    @property
    def dim(self) -> int:
        return self.demos[0].trajectory.dim

    @property
    def horizon(self) -> int:
        return self.demos[0].trajectory.horizon


@dataclass(frozen=True)
class FrameVarianceProfile:
    """Per-timestep minimal variance v and reproduction weights w = 1/(v+eps)."""

    v: np.ndarray
    w: np.ndarray
    epsilon: float = 0.01

    def __post_init__(self):
        v = as_float_array(self.v, "v").reshape(-1)
        w = as_float_array(self.w, "w").reshape(-1)
        if np.any(v < 0):
            raise ValueError("variances must be non-negative")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)


def to_local(traj: Trajectory, frame: Frame) -> Trajectory:
    """Express a global-space trajectory in the given local frame."""
    pts = traj.points
    if pts.shape[1] != frame.dim:
        raise ValueError(f"trajectory dim {pts.shape[1]} != frame dim {frame.dim}")
    return Trajectory((pts - frame.translation) @ frame.rotation)


def to_global(traj: Trajectory, frame: Frame) -> Trajectory:
    """Express a local-frame trajectory in the global space."""
    pts = traj.points
    if pts.shape[1] != frame.dim:
        raise ValueError(f"trajectory dim {pts.shape[1]} != frame dim {frame.dim}")
    return Trajectory(pts @ frame.rotation.T + frame.translation)


def resample(traj: Trajectory, horizon: int) -> Trajectory:
    """Resample to `horizon` points uniformly spaced in arc length.

    Endpoints are preserved exactly; interior points are linear
    interpolations of the original polyline.
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    pts = traj.points
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = float(seg.sum())
    if total <= 0.0:
        raise ValueError("cannot resample a zero-length trajectory")
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, total, horizon)
    out = np.empty((horizon, pts.shape[1]))
    for d in range(pts.shape[1]):
        out[:, d] = np.interp(targets, s, pts[:, d])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return Trajectory(out)


def local_sets(dataset: Dataset) -> list:
    """Per-frame lists of local trajectories: K lists of N Trajectory."""
    sets = []
    for k in range(dataset.num_frames):
        sets.append(
            [to_local(demo.trajectory, demo.query.frames[k]) for demo in dataset.demos]
        )
    return sets


def variance_profile(sets, epsilon: float = 0.01) -> FrameVarianceProfile:
    """Minimal per-timestep variance across frames, and weights 1/(v+eps).

    Per-timestep variance within one frame is the trace of the unbiased
    sample covariance of the N local points at that step.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    per_frame = []
    for trajs in sets:
        if len(trajs) < 2:
            raise ValueError("variance needs at least 2 trajectories per frame")
        stack = np.stack([t.points for t in trajs])  # N x T x D
        var = stack.var(axis=0, ddof=1).sum(axis=1)  # trace of per-step covariance
        per_frame.append(var)
    v = np.min(np.stack(per_frame), axis=0)
    return FrameVarianceProfile(v=v, w=1.0 / (v + epsilon), epsilon=epsilon)


# ---------------------------------------------------------------------------
# dataset (de)serialization


def frame_to_dict(frame: Frame) -> dict:
    return {
        "rotation": frame.rotation.tolist(),
        "translation": frame.translation.tolist(),
    }


def frame_from_dict(data: dict) -> Frame:
    return Frame(np.array(data["rotation"]), np.array(data["translation"]))


def query_to_dict(query: TaskQuery) -> dict:
    return {"frames": [frame_to_dict(f) for f in query.frames]}


def query_from_dict(data: dict) -> TaskQuery:
    return TaskQuery(tuple(frame_from_dict(f) for f in data["frames"]))


def dataset_to_dict(dataset: Dataset) -> dict:
    return {
        "schema": DATASET_SCHEMA_VERSION,
        "dim": dataset.dim,
        "horizon": dataset.horizon,
        "num_frames": dataset.num_frames,
        "demos": [
            {
                "query": query_to_dict(demo.query),
                "trajectory": demo.trajectory.points.tolist(),
            }
            for demo in dataset.demos
        ],
    }


def dataset_from_dict(data: dict) -> Dataset:
    if data.get("schema") != DATASET_SCHEMA_VERSION:
        raise ValueError(f"unsupported dataset schema: {data.get('schema')!r}")
    demos = tuple(
        Demonstration(
            query=query_from_dict(d["query"]),
            trajectory=Trajectory(np.array(d["trajectory"])),
        )
        for d in data["demos"]
    )
    ds = Dataset(demos)
    for key in ("dim", "horizon", "num_frames"):
        if data[key] != getattr(ds, key):
            raise ValueError(f"dataset header field {key!r} does not match demos")
    return ds


def save_dataset(dataset: Dataset, path) -> None:
    with open(path, "w") as fh:
        json.dump(dataset_to_dict(dataset), fh)


def load_dataset(path) -> Dataset:
    with open(path) as fh:
        return dataset_from_dict(json.load(fh))
