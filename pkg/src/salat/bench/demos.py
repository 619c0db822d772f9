"""Scripted demonstrator: smooth, mode-aware valid trajectories.

Stands in for human tablet strokes: exits the start docker along its
axis, detours around the obstacle on the requested side with clearance
well beyond the radius, enters the goal docker along its axis (or
traverses the tunnel and loops back to the start docker). A small smooth
noise term, vanishing at the endpoints, varies the strokes. Every
returned demonstration passes check_success for its own scenario.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from ..geometry import Demonstration, Trajectory
from .scenario import Scenario
from .scoring import check_success

DENSE_SAMPLES = 240


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _perp(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


def _obstacle_arc(c, radius, p_from, p_to, side: str, pad: float = 0.0):
    """Waypoints walking around the disc from one anchor bearing to the other.

    The sweep direction is chosen so the arc midpoint lies on the requested
    lateral side of the from->to chord; interior points are spaced <= 45 deg
    apart, so a spline through them stays near the clearance circle.
    """
    clear = 1.5 * radius + 0.03 + pad
    a0 = np.arctan2(*((p_from - c)[::-1]))
    a1 = np.arctan2(*((p_to - c)[::-1]))
    direction = _unit(p_to - p_from)
    lateral = _perp(direction) if side == "left" else -_perp(direction)
    candidates = []
    for sweep_dir in (1.0, -1.0):
        sweep = (a1 - a0) % (2 * np.pi) if sweep_dir > 0 else -((a0 - a1) % (2 * np.pi))
        if sweep == 0.0:
            sweep = sweep_dir * 2 * np.pi
        mid = c + clear * np.array(
            [np.cos(a0 + sweep / 2), np.sin(a0 + sweep / 2)]
        )
        candidates.append((float(lateral @ (mid - p_from)), sweep))
    _, sweep = max(candidates)
    n = max(2, int(np.ceil(abs(sweep) / (np.pi / 4))))
    angles = a0 + sweep * np.arange(1, n) / n
    return [c + clear * np.array([np.cos(a), np.sin(a)]) for a in angles]


def _spline(waypoints, start_dir, end_dir, n_samples=DENSE_SAMPLES):
    pts = np.asarray(waypoints, dtype=float)
    chord = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if np.any(chord <= 1e-9):
        keep = np.concatenate([[True], chord > 1e-9])
        pts = pts[keep]
        chord = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(chord)])
    spline = CubicSpline(
        s, pts, bc_type=((1, start_dir), (1, end_dir)), axis=0
    )
    return spline(np.linspace(0.0, s[-1], n_samples))


def _smooth_noise(n_samples, rng, amplitude):
    t = np.linspace(0.0, 1.0, n_samples)
    envelope = np.sin(np.pi * t) ** 2
    noise = np.zeros((n_samples, 2))
    for d in range(2):
        for harmonic in (1, 2):
            phase = rng.uniform(0, 2 * np.pi)
            noise[:, d] += (
                rng.normal(scale=amplitude)
                * np.sin(2 * np.pi * harmonic * t + phase)
            )
    return noise * envelope[:, None]


def _pick_side(scenario: Scenario, mode: str, rng) -> str:
    if mode in ("left", "right"):
        return mode
    if mode != "auto":
        raise ValueError(f"unknown demonstrator mode {mode!r}")
    c = scenario.obstacle.center
    p_from = scenario.start.mouth
    p_to = (
        scenario.tunnel.entrance
        if scenario.tunnel is not None
        else scenario.goal.mouth
    )
    direction = _unit(p_to - p_from)
    # shorter detour side, flipped 30% of the time so both modes appear
    side = "left" if float(_perp(direction) @ (c - p_from)) <= 0 else "right"
    if rng.random() < 0.3:
        side = "right" if side == "left" else "left"
    return side


def _docker_waypoints(scenario: Scenario, side):
    start, goal = scenario.start, scenario.goal
    pts = [start.mouth, start.mouth + start.axis * 0.09]
    if scenario.obstacle is not None:
        pts.extend(
            _obstacle_arc(
                scenario.obstacle.center,
                scenario.obstacle.radius,
                pts[-1],
                goal.mouth + goal.axis * 0.09,
                side,
            )
        )
    pts.extend([goal.mouth + goal.axis * 0.09, goal.mouth])
    return pts, scenario.start.axis, -goal.axis


def _tunnel_waypoints(scenario: Scenario, side, return_side, pad: float = 0.0):
    start, tunnel, obstacle = scenario.start, scenario.tunnel, scenario.obstacle
    u, n = tunnel.axis, _perp(tunnel.axis)
    rn = n if return_side == "left" else -n
    mid = tunnel.entrance + u * (tunnel.length / 2)
    approach = tunnel.entrance - u * (0.18 + pad)
    pts = [start.mouth, start.mouth + start.axis * 0.09]
    pts.extend(
        _obstacle_arc(obstacle.center, obstacle.radius, pts[-1], approach, side, pad)
    )
    pts.extend(
        [
            approach,
            tunnel.entrance - u * 0.12,
            tunnel.entrance - u * 0.06,
            tunnel.entrance,
            mid,
            tunnel.far_end,
            tunnel.far_end + u * 0.07,
        ]
    )
    lateral = tunnel.inner_width / 2 + 0.10 + pad
    pts.extend(
        [
            tunnel.far_end + u * 0.10 + rn * lateral,
            mid + rn * lateral,
            tunnel.entrance - u * 0.10 + rn * lateral,
        ]
    )
    back_anchor = start.mouth + start.axis * 0.09
    return_radius = obstacle.radius + 0.02
    clear = 1.5 * return_radius + 0.03 + pad
    for dist in (0.22, 0.15, 0.10):
        entry_anchor = start.mouth + start.axis * dist
        if np.linalg.norm(entry_anchor - obstacle.center) >= clear:
            break
    else:
        # obstacle sits right in front of the docker: squeeze past it
        entry_anchor = start.mouth + start.axis * 0.12
        entry_anchor = entry_anchor + _unit(entry_anchor - obstacle.center) * 0.05
    pts.extend(
        _obstacle_arc(obstacle.center, return_radius, pts[-1], entry_anchor, side, pad)
    )
    pts.extend([entry_anchor, back_anchor, start.mouth])
    return pts, start.axis, -start.axis


def synth_demo(scenario: Scenario, mode: str = "auto", noise_seed: int = 0):
    """One valid Demonstration for the scenario, or RuntimeError."""
    rng = np.random.default_rng(noise_seed)
    side = (
        _pick_side(scenario, mode, rng) if scenario.obstacle is not None else None
    )
    sides = [side]
    if side is not None and mode == "auto":
        sides.append("right" if side == "left" else "left")
    attempts = []
    if scenario.kind == "docker-obstacle-tunnel":
        for pad in (0.0, 0.04):
            for s in sides:
                for return_side in ("left", "right"):
                    attempts.append(
                        lambda s=s, rs=return_side, p=pad: _tunnel_waypoints(
                            scenario, s, rs, p
                        )
                    )
    else:
        for s in sides:
            attempts.append(lambda s=s: _docker_waypoints(scenario, s))

    noise_scales = (0.006, 0.003, 0.0)
    for build in attempts:
        waypoints, d0, d1 = build()
        for scale in noise_scales:
            dense = _spline(waypoints, d0, d1)
            dense = dense + _smooth_noise(len(dense), rng, scale)
            dense[0] = waypoints[0]
            dense[-1] = waypoints[-1]
            traj = Trajectory(dense)
            ok, _ = check_success(traj, scenario)
            if ok:
                return Demonstration(query=scenario.query(), trajectory=traj)
    raise RuntimeError("demonstrator could not produce a valid trajectory")
