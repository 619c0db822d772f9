/** Demonstration submission: smooth the drawn stroke, debounce the post so a
 * rapid double submit persists exactly one demo, and keep the local list in
 * step with the server (undo deletes on both sides). */

import type { ApiClient } from "./api.js";
import { smoothStroke, validateStroke } from "./stroke.js";
import type { Point } from "./types.js";

export interface DemoPadEvents {
  onDemo?: (trajectory: number[][]) => void;
  onMessage?: (message: string) => void;
}

export class DemoPad {
  /** Server echoes, resampled to the scenario horizon. */
  readonly demos: number[][][] = [];

  private pending: Point[] | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight: Promise<void> = Promise.resolve();

  constructor(
    private readonly api: ApiClient,
    private readonly scenarioId: string,
    private readonly events: DemoPadEvents = {},
    private readonly debounceMs = 150,
  ) {}

  /** Queue a stroke for submission. A second call inside the debounce window
   * replaces the pending stroke, so only one demo is posted. */
  submit(stroke: Point[]): void {
    const problem = validateStroke(stroke);
    if (problem !== null) {
      this.events.onMessage?.(problem);
      return;
    }
    this.pending = smoothStroke(stroke);
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => this.post(), this.debounceMs);
  }

  /** Submit whatever is pending right now (used by tests and page unload). */
  flush(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
      this.post();
    }
    return this.inFlight;
  }

  private post(): void {
    const stroke = this.pending;
    this.timer = null;
    this.pending = null;
    if (stroke === null) return;
    this.inFlight = this.inFlight.then(() =>
      this.api
        .submitDemo(this.scenarioId, stroke)
        .then((echo) => {
          this.demos.push(echo.trajectory);
          this.events.onDemo?.(echo.trajectory);
        })
        .catch((err) => this.events.onMessage?.(String(err))),
    );
  }

  undo(): Promise<void> {
    if (this.demos.length === 0) {
      this.events.onMessage?.("no demonstrations to undo");
      return Promise.resolve();
    }
    return this.api
      .removeLastDemo(this.scenarioId)
      .then(() => {
        this.demos.pop();
      })
      .catch((err) => this.events.onMessage?.(String(err)));
  }
}
