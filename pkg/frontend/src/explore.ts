/** Interactive query exploration. Frame handles move freely during a drag;
 * only drag-end fires a generate request, and a monotone token discards any
 * response that a newer request has superseded. */

import type { ApiClient } from "./api.js";
import type { FrameDict, GenerateResponse, Point, QueryDict } from "./types.js";

export interface ExplorerEvents {
  onResult?: (result: GenerateResponse) => void;
  onError?: (message: string) => void;
}

export class QueryExplorer {
  readonly frames: FrameDict[];
  result: GenerateResponse | null = null;
  policy = "mean";
  seed = 0;

  private token = 0;
  private dragIndex: number | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly modelId: string,
    frames: FrameDict[],
    private readonly events: ExplorerEvents = {},
  ) {
    this.frames = frames.map((f) => ({
      rotation: f.rotation.map((row) => row.slice()),
      translation: f.translation.slice(),
    }));
  }

  get query(): QueryDict {
    return { frames: this.frames };
  }

  beginDrag(frameIndex: number): void {
    if (frameIndex < 0 || frameIndex >= this.frames.length) {
      throw new Error(`no frame ${frameIndex}`);
    }
    this.dragIndex = frameIndex;
  }

  /** Move the dragged frame; no request is made until the drag ends. */
  dragTo(world: Point): void {
    if (this.dragIndex === null) return;
    this.frames[this.dragIndex].translation = [world[0], world[1]];
  }

  endDrag(): Promise<void> {
    if (this.dragIndex === null) return Promise.resolve();
    this.dragIndex = null;
    return this.requestGenerate();
  }

  /** Translate every frame by the same offset (whole-scene drag). */
  translateAll(offset: Point): void {
    for (const frame of this.frames) {
      frame.translation = [
        frame.translation[0] + offset[0],
        frame.translation[1] + offset[1],
      ];
    }
  }

  requestGenerate(): Promise<void> {
    const token = ++this.token;
    return this.api
      .generate(this.modelId, this.query, { policy: this.policy, seed: this.seed })
      .then((result) => {
        if (token !== this.token) return; // superseded by a newer drag
        this.result = result;
        this.events.onResult?.(result);
      })
      .catch((err) => {
        if (token !== this.token) return;
        this.events.onError?.(String(err));
      });
  }
}
