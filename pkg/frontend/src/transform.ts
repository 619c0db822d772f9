/** World ([0,1]² with y up) ↔ screen (pixels with y down) mapping. */

import type { Point } from "./types.js";

export class Viewport {
  readonly scale: number;

  constructor(
    readonly width: number,
    readonly height: number,
    readonly margin = 20,
  ) {
    const usable = Math.min(width, height) - 2 * margin;
    if (usable <= 0) throw new Error("viewport too small for margin");
    this.scale = usable;
  }

  worldToScreen([x, y]: Point): Point {
    return [this.margin + x * this.scale, this.margin + (1 - y) * this.scale];
  }

  screenToWorld([sx, sy]: Point): Point {
    return [(sx - this.margin) / this.scale, 1 - (sy - this.margin) / this.scale];
  }

  /** One screen pixel expressed in world units. */
  pixelToWorld(pixels = 1): number {
    return pixels / this.scale;
  }
}
