"""Collision and task-success predicates for generated trajectories."""

from __future__ import annotations

import numpy as np

from ..geometry import Trajectory
from .scenario import Scenario

POS_TOL = 0.02
ANG_TOL = np.deg2rad(20.0)

FAILURE_KINDS = ("collision", "missed-docker", "missed-tunnel", "non-finite")


def _seg_point_distance(a, b, p):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = np.clip((p - a) @ ab / denom, 0.0, 1.0)
    return float(np.linalg.norm(a + t * ab - p))


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


def check_collision(traj: Trajectory, scenario: Scenario):
    """(collided, first offending segment index or None). Strict interior
    tests: tangency does not count."""
    pts = traj.points
    walls = scenario.walls()
    obstacle = scenario.obstacle
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        if obstacle is not None:
            if _seg_point_distance(a, b, obstacle.center) < obstacle.radius:
                return True, i
        for w1, w2 in walls:
            if _segments_intersect(a, b, w1, w2):
                return True, i
    return False, None


def _heading_ok(step: np.ndarray, axis: np.ndarray) -> bool:
    norm = np.linalg.norm(step)
    if norm == 0.0:
        return False
    cos = float(step @ axis) / norm
    return cos >= np.cos(ANG_TOL)


def _tunnel_traversed(traj: Trajectory, scenario: Scenario) -> bool:
    tunnel = scenario.tunnel
    u = tunnel.axis
    n = np.array([-u[1], u[0]])
    rel = traj.points - tunnel.entrance
    s = rel @ u
    d = np.abs(rel @ n)
    inside = (s >= 0.0) & (s <= tunnel.length) & (d < tunnel.inner_width / 2)
    best_span = 0.0
    i = 0
    T = len(inside)
    while i < T:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < T and inside[j + 1]:
            j += 1
        best_span = max(best_span, s[i : j + 1].max() - s[i : j + 1].min())
        i = j + 1
    return best_span >= 0.7 * tunnel.length


def check_success(traj: Trajectory, scenario: Scenario):
    """(succeeded, failure kind or None)."""
    pts = traj.points
    if not np.all(np.isfinite(pts)):
        return False, "non-finite"
    collided, _ = check_collision(traj, scenario)
    if collided:
        return False, "collision"
    start = scenario.start
    if np.linalg.norm(pts[0] - start.mouth) > POS_TOL or not _heading_ok(
        pts[1] - pts[0], start.axis
    ):
        return False, "missed-docker"
    if scenario.kind == "docker-obstacle-tunnel":
        if not _tunnel_traversed(traj, scenario):
            return False, "missed-tunnel"
        # returns to the start docker, entering along its axis
        if np.linalg.norm(pts[-1] - start.mouth) > POS_TOL or not _heading_ok(
            pts[-1] - pts[-2], -start.axis
        ):
            return False, "missed-docker"
        return True, None
    goal = scenario.goal
    if np.linalg.norm(pts[-1] - goal.mouth) > POS_TOL or not _heading_ok(
        pts[-1] - pts[-2], -goal.axis
    ):
        return False, "missed-docker"
    return True, None
