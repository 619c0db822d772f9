"""Deterministic SVG rendering of scenarios, trajectories and attention."""

from __future__ import annotations

import numpy as np

from .scenario import Scenario

_WORLD = 480  # px for the unit square
_PANEL = 160  # px height of each curve panel
_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _world_xy(p) -> str:
    return f"{_fmt(p[0] * _WORLD)},{_fmt((1.0 - p[1]) * _WORLD)}"


def _polyline(points, color, width=2, dash=None) -> str:
    path = " ".join(_world_xy(p) for p in points)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline points="{path}" fill="none" stroke="{color}"'
        f' stroke-width="{width}"{dash_attr}/>'
    )


def _panel(curves, y_offset, title) -> list:
    parts = [
        f'<g transform="translate(0,{y_offset})">',
        f'<rect x="0" y="0" width="{_WORLD}" height="{_PANEL}" fill="#fafafa" stroke="#ccc"/>',
        f'<text x="4" y="14" font-size="12" fill="#333">{title}</text>',
    ]
    T = len(curves[0])
    for k, curve in enumerate(curves):
        pts = " ".join(
            f"{_fmt(t / (T - 1) * _WORLD)},{_fmt(_PANEL - 8 - float(v) * (_PANEL - 24))}"
            for t, v in enumerate(curve)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{_COLORS[k % len(_COLORS)]}" stroke-width="2"/>'
        )
    parts.append("</g>")
    return parts


def render_svg(scenario: Scenario, trajectories=(), attention=None, alpha=None) -> str:
    """World geometry plus trajectories; optional weight-vs-time panels."""
    height = _WORLD
    panels = []
    if attention is not None:
        attention = np.asarray(attention, dtype=float)
        panels.append((attention.T, "attention"))
    if alpha is not None:
        alpha = np.asarray(alpha, dtype=float)
        panels.append((alpha.T, "alpha"))
    height += len(panels) * (_PANEL + 10)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WORLD}" height="{height}" '
        f'viewBox="0 0 {_WORLD} {height}">',
        f'<rect x="0" y="0" width="{_WORLD}" height="{_WORLD}" fill="#ffffff" stroke="#000"/>',
    ]
    for a, b in scenario.walls():
        parts.append(_polyline([a, b], "#000000", width=3))
    if scenario.obstacle is not None:
        c, r = scenario.obstacle.center, scenario.obstacle.radius
        parts.append(
            f'<circle cx="{_fmt(c[0] * _WORLD)}" cy="{_fmt((1 - c[1]) * _WORLD)}" '
            f'r="{_fmt(r * _WORLD)}" fill="#bbbbbb" stroke="#555"/>'
        )
    for i, traj in enumerate(trajectories):
        pts = traj.points if hasattr(traj, "points") else np.asarray(traj)
        parts.append(_polyline(pts, _COLORS[i % len(_COLORS)]))
    offset = _WORLD + 10
    for curves, title in panels:
        parts.extend(_panel(curves, offset, title))
        offset += _PANEL + 10
    parts.append("</svg>")
    return "\n".join(parts)


def emit_svg(scenario: Scenario, trajectories=(), attention=None, alpha=None, path=None) -> str:
    svg = render_svg(scenario, trajectories, attention, alpha)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(svg)
    return svg
