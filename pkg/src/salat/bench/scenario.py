"""Simulated docker / obstacle / tunnel worlds and their task queries.

All geometry lives in the unit square. A docker is a U-shaped slot: a
mouth point, an outward axis (the direction a trajectory leaves or
enters along) and three walls behind the mouth. A tunnel is a pair of
parallel walls open at both ends; its frame is anchored at the entrance.
The obstacle is a disc with an identity-rotation frame at its center.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import Frame, TaskQuery

TASK_KINDS = ("docker", "docker-obstacle", "docker-obstacle-tunnel")


def _unit(angle: float) -> np.ndarray:
    return np.array([np.cos(angle), np.sin(angle)])


def _perp(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


@dataclass(frozen=True)
class Docker:
    mouth: np.ndarray  # opening center
    angle: float  # outward axis direction
    width: float = 0.08
    depth: float = 0.06

    @property
    def axis(self) -> np.ndarray:
        return _unit(self.angle)

    @property
    def frame(self) -> Frame:
        return Frame.from_angle(self.angle, self.mouth)

    def walls(self):
        a, p = self.axis, _perp(self.axis)
        left = self.mouth + p * (self.width / 2)
        right = self.mouth - p * (self.width / 2)
        back_l = left - a * self.depth
        back_r = right - a * self.depth
        return [(left, back_l), (right, back_r), (back_l, back_r)]


@dataclass(frozen=True)
class Tunnel:
    entrance: np.ndarray  # opening the trajectory enters through
    angle: float  # direction from entrance toward the far end
    length: float = 0.16
    inner_width: float = 0.07

    @property
    def axis(self) -> np.ndarray:
        return _unit(self.angle)

    @property
    def far_end(self) -> np.ndarray:
        return self.entrance + self.axis * self.length

    @property
    def frame(self) -> Frame:
        return Frame.from_angle(self.angle, self.entrance)

    def walls(self):
        u, n = self.axis, _perp(self.axis)
        off = n * (self.inner_width / 2)
        return [
            (self.entrance + off, self.far_end + off),
            (self.entrance - off, self.far_end - off),
        ]


@dataclass(frozen=True)
class Obstacle:
    center: np.ndarray
    radius: float

    @property
    def frame(self) -> Frame:
        return Frame(np.eye(2), self.center)


@dataclass(frozen=True)
class Scenario:
    kind: str
    start: Docker
    goal: Docker | None = None
    obstacle: Obstacle | None = None
    tunnel: Tunnel | None = None

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")

    def query(self) -> TaskQuery:
        frames = [self.start.frame]
        if self.obstacle is not None:
            frames.append(self.obstacle.frame)
        if self.tunnel is not None:
            frames.append(self.tunnel.frame)
        elif self.goal is not None:
            frames.append(self.goal.frame)
        return TaskQuery(tuple(frames))

    def walls(self):
        segs = list(self.start.walls())
        if self.goal is not None:
            segs.extend(self.goal.walls())
        if self.tunnel is not None:
            segs.extend(self.tunnel.walls())
        return segs

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind,
            "start": {
                "mouth": self.start.mouth.tolist(),
                "angle": self.start.angle,
                "width": self.start.width,
                "depth": self.start.depth,
            },
        }
        if self.goal is not None:
            data["goal"] = {
                "mouth": self.goal.mouth.tolist(),
                "angle": self.goal.angle,
                "width": self.goal.width,
                "depth": self.goal.depth,
            }
        if self.obstacle is not None:
            data["obstacle"] = {
                "center": self.obstacle.center.tolist(),
                "radius": self.obstacle.radius,
            }
        if self.tunnel is not None:
            data["tunnel"] = {
                "entrance": self.tunnel.entrance.tolist(),
                "angle": self.tunnel.angle,
                "length": self.tunnel.length,
                "inner_width": self.tunnel.inner_width,
            }
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        start = Docker(
            np.array(data["start"]["mouth"]),
            data["start"]["angle"],
            data["start"]["width"],
            data["start"]["depth"],
        )
        goal = None
        if "goal" in data:
            goal = Docker(
                np.array(data["goal"]["mouth"]),
                data["goal"]["angle"],
                data["goal"]["width"],
                data["goal"]["depth"],
            )
        obstacle = None
        if "obstacle" in data:
            obstacle = Obstacle(
                np.array(data["obstacle"]["center"]), data["obstacle"]["radius"]
            )
        tunnel = None
        if "tunnel" in data:
            tunnel = Tunnel(
                np.array(data["tunnel"]["entrance"]),
                data["tunnel"]["angle"],
                data["tunnel"]["length"],
                data["tunnel"]["inner_width"],
            )
        return cls(data["kind"], start, goal, obstacle, tunnel)


@dataclass
class PoseRanges:
    """Per-regime sampling ranges; test ranges are disjoint from train."""

    start_x: tuple
    start_y: tuple
    start_angle: tuple  # offset around 0 (pointing +x)
    goal_x: tuple
    goal_y: tuple
    goal_angle: tuple  # offset around pi (pointing -x)
    obstacle_x: tuple
    obstacle_y: tuple
    radius: tuple = (0.04, 0.06)


TRAIN_RANGES = PoseRanges(
    start_x=(0.10, 0.22),
    start_y=(0.38, 0.62),
    start_angle=(-0.35, 0.35),
    goal_x=(0.78, 0.90),
    goal_y=(0.38, 0.62),
    goal_angle=(-0.35, 0.35),
    obstacle_x=(0.40, 0.60),
    obstacle_y=(0.38, 0.62),
)

# positions outside the training boxes, orientations outside the training arc
TEST_RANGES = PoseRanges(
    start_x=(0.10, 0.22),
    start_y=(0.15, 0.34),  # also mirrored to (0.66, 0.85)
    start_angle=(0.45, 0.80),  # sign flipped at random
    goal_x=(0.78, 0.90),
    goal_y=(0.15, 0.34),
    goal_angle=(0.45, 0.80),
    obstacle_x=(0.30, 0.38),  # also mirrored to (0.62, 0.70)
    obstacle_y=(0.30, 0.70),
)


class ScenarioSampler:
    """Deterministic scenario generator for a task kind and regime."""

    def __init__(self, kind: str, regime: str = "train", seed: int = 0):
        if kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {kind!r}")
        if regime not in ("train", "test"):
            raise ValueError(f"unknown regime {regime!r}")
        self.kind = kind
        self.regime = regime
        self.rng = np.random.default_rng(seed)

    def _uniform(self, lo_hi):
        return self.rng.uniform(*lo_hi)

    def _mirrored(self, lo_hi):
        """Sample from lo_hi or its reflection about y = 0.5."""
        v = self._uniform(lo_hi)
        return v if self.rng.random() < 0.5 else 1.0 - v

    def _signed(self, lo_hi):
        v = self._uniform(lo_hi)
        return v if self.rng.random() < 0.5 else -v

    def sample(self) -> Scenario:
        for _ in range(1000):
            scenario = self._propose()
            if self._valid(scenario):
                return scenario
        raise RuntimeError("rejection sampling exhausted after 1000 proposals")

    def _propose(self) -> Scenario:
        r = TRAIN_RANGES if self.regime == "train" else TEST_RANGES
        mirrored = self.regime == "test"
        sy = self._mirrored(r.start_y) if mirrored else self._uniform(r.start_y)
        gy = self._mirrored(r.goal_y) if mirrored else self._uniform(r.goal_y)
        sa = self._signed(r.start_angle) if mirrored else self._uniform(r.start_angle)
        ga = self._signed(r.goal_angle) if mirrored else self._uniform(r.goal_angle)
        start = Docker(np.array([self._uniform(r.start_x), sy]), sa)
        goal_pos = np.array([self._uniform(r.goal_x), gy])
        obstacle = None
        if self.kind != "docker":
            ox = self._mirrored(r.obstacle_x) if mirrored else self._uniform(r.obstacle_x)
            obstacle = Obstacle(
                np.array([ox, self._uniform(r.obstacle_y)]),
                self._uniform(r.radius),
            )
        if self.kind == "docker-obstacle-tunnel":
            tunnel = Tunnel(goal_pos, np.pi + ga)
            return Scenario(self.kind, start, obstacle=obstacle, tunnel=tunnel)
        goal = Docker(goal_pos, np.pi + ga)
        return Scenario(self.kind, start, goal=goal, obstacle=obstacle)

    def _valid(self, scenario: Scenario) -> bool:
        margin = 0.04
        pts = [scenario.start.mouth]
        if scenario.goal is not None:
            pts.append(scenario.goal.mouth)
        if scenario.tunnel is not None:
            pts.extend([scenario.tunnel.entrance, scenario.tunnel.far_end])
        for a, b in scenario.walls():
            pts.extend([a, b])
        for p in pts:
            if np.any(p < margin) or np.any(p > 1.0 - margin):
                return False
        if scenario.obstacle is not None:
            c, rad = scenario.obstacle.center, scenario.obstacle.radius
            if np.any(c < rad + margin) or np.any(c > 1.0 - rad - margin):
                return False
            clearance = rad + 0.12
            anchors = [scenario.start.mouth]
            if scenario.goal is not None:
                anchors.append(scenario.goal.mouth)
            if scenario.tunnel is not None:
                anchors.extend([scenario.tunnel.entrance, scenario.tunnel.far_end])
            for p in anchors:
                if np.linalg.norm(c - p) < clearance:
                    return False
        return True
