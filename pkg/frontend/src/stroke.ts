/** Pointer-stroke capture and smoothing. Strokes stay in raw drawn form
 * here; resampling to the model horizon happens server-side only. */

import type { Point } from "./types.js";

export const MIN_STROKE_POINTS = 3;

export class StrokeRecorder {
  private points: Point[] = [];
  private drawing = false;

  begin(p: Point): void {
    this.points = [p];
    this.drawing = true;
  }

  extend(p: Point): void {
    if (!this.drawing) return;
    const last = this.points[this.points.length - 1];
    // Drop duplicate samples from pointer-event jitter.
    if (last[0] === p[0] && last[1] === p[1]) return;
    this.points.push(p);
  }

  end(): Point[] {
    this.drawing = false;
    return this.points;
  }

  get active(): boolean {
    return this.drawing;
  }

  get current(): readonly Point[] {
    return this.points;
  }
}

/** Centered moving average with the endpoints pinned, so a smoothed stroke
 * still starts and ends exactly where the user drew it. */
export function smoothStroke(points: Point[], window = 2): Point[] {
  if (points.length <= 2 || window < 1) return points.slice();
  const out: Point[] = [];
  for (let i = 0; i < points.length; i++) {
    if (i === 0 || i === points.length - 1) {
      out.push([...points[i]]);
      continue;
    }
    const lo = Math.max(0, i - window);
    const hi = Math.min(points.length - 1, i + window);
    let x = 0;
    let y = 0;
    for (let j = lo; j <= hi; j++) {
      x += points[j][0];
      y += points[j][1];
    }
    const n = hi - lo + 1;
    out.push([x / n, y / n]);
  }
  return out;
}

export function validateStroke(points: Point[]): string | null {
  if (points.length < MIN_STROKE_POINTS) {
    return `stroke needs at least ${MIN_STROKE_POINTS} points, got ${points.length}`;
  }
  return null;
}
