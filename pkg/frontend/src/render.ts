/** Canvas drawing for the scenario, strokes, generated trajectory, and the
 * attention panel. Pure presentation: every plotted value arrives from the
 * service (or the user's pointer) unchanged. */

import { FRAME_COLORS, stackPanel } from "./attention.js";
import type { Viewport } from "./transform.js";
import type { DockerDict, Point, ScenarioDict, TunnelDict } from "./types.js";

function polyline(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  points: readonly number[][],
  style: string,
  width = 1.5,
): void {
  if (points.length < 2) return;
  ctx.strokeStyle = style;
  ctx.lineWidth = width;
  ctx.beginPath();
  const [x0, y0] = view.worldToScreen([points[0][0], points[0][1]]);
  ctx.moveTo(x0, y0);
  for (let i = 1; i < points.length; i++) {
    const [x, y] = view.worldToScreen([points[i][0], points[i][1]]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function dockerWalls(d: DockerDict): number[][][] {
  const dir: Point = [Math.cos(d.angle), Math.sin(d.angle)];
  const normal: Point = [-dir[1], dir[0]];
  const half = d.width / 2;
  const mouth = d.mouth;
  const side = (s: number) => {
    const a = [mouth[0] + s * half * normal[0], mouth[1] + s * half * normal[1]];
    const b = [a[0] - d.depth * dir[0], a[1] - d.depth * dir[1]];
    return [a, b];
  };
  const [l1, l2] = side(1);
  const [r1, r2] = side(-1);
  return [[l1, l2], [r1, r2], [l2, r2]];
}

function tunnelWalls(t: TunnelDict): number[][][] {
  const dir: Point = [Math.cos(t.angle), Math.sin(t.angle)];
  const normal: Point = [-dir[1], dir[0]];
  const half = t.width / 2;
  const side = (s: number) => {
    const a = [
      t.entrance[0] + s * half * normal[0],
      t.entrance[1] + s * half * normal[1],
    ];
    const b = [a[0] + t.length * dir[0], a[1] + t.length * dir[1]];
    return [a, b];
  };
  return [side(1), side(-1)];
}

export function drawScenario(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  scenario: ScenarioDict,
): void {
  for (const wall of dockerWalls(scenario.start)) {
    polyline(ctx, view, wall, "#333", 3);
  }
  if (scenario.goal) {
    for (const wall of dockerWalls(scenario.goal)) {
      polyline(ctx, view, wall, "#333", 3);
    }
  }
  if (scenario.tunnel) {
    for (const wall of tunnelWalls(scenario.tunnel)) {
      polyline(ctx, view, wall, "#555", 3);
    }
  }
  if (scenario.obstacle) {
    const [cx, cy] = view.worldToScreen([
      scenario.obstacle.center[0],
      scenario.obstacle.center[1],
    ]);
    ctx.strokeStyle = "#a40";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(cx, cy, scenario.obstacle.radius * view.scale, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export function drawStroke(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  points: readonly number[][],
  faded = false,
): void {
  polyline(ctx, view, points, faded ? "#9bc" : "#07a", faded ? 1 : 2);
}

/** Generated trajectory; points inside the obstacle are highlighted so
 * collisions are visible at a glance. */
export function drawGenerated(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  points: readonly number[][],
  scenario: ScenarioDict | null,
): void {
  polyline(ctx, view, points, "#d22", 2.5);
  if (!scenario?.obstacle) return;
  const { center, radius } = scenario.obstacle;
  ctx.fillStyle = "#f80";
  for (const p of points) {
    if (Math.hypot(p[0] - center[0], p[1] - center[1]) < radius) {
      const [x, y] = view.worldToScreen([p[0], p[1]]);
      ctx.beginPath();
      ctx.arc(x, y, 3, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}

export function drawFrameHandles(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  translations: readonly number[][],
): void {
  translations.forEach((t, k) => {
    const [x, y] = view.worldToScreen([t[0], t[1]]);
    ctx.fillStyle = FRAME_COLORS[k % FRAME_COLORS.length];
    ctx.beginPath();
    ctx.arc(x, y, 6, 0, 2 * Math.PI);
    ctx.fill();
  });
}

export function drawAttentionPanel(
  ctx: CanvasRenderingContext2D,
  weights: number[][],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  if (weights.length === 0) return;
  const columns = stackPanel(weights, height);
  const colWidth = width / columns.length;
  columns.forEach((segments, t) => {
    for (const seg of segments) {
      ctx.fillStyle = FRAME_COLORS[seg.frame % FRAME_COLORS.length];
      ctx.fillRect(t * colWidth, seg.y, Math.ceil(colWidth), seg.height);
    }
  });
}
