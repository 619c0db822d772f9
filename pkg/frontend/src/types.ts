/** Shared JSON payload types for the trajectory service API. */

export type Point = [number, number];

export interface FrameDict {
  rotation: number[][];
  translation: number[];
}

export interface QueryDict {
  frames: FrameDict[];
}

export interface DockerDict {
  mouth: number[];
  angle: number;
  width: number;
  depth: number;
}

export interface ObstacleDict {
  center: number[];
  radius: number;
}

export interface TunnelDict {
  entrance: number[];
  angle: number;
  width: number;
  length: number;
}

export interface ScenarioDict {
  kind: string;
  start: DockerDict;
  goal?: DockerDict;
  obstacle?: ObstacleDict;
  tunnel?: TunnelDict;
}

export interface ScenarioRecord {
  id: string;
  scenario: ScenarioDict;
  horizon: number;
  demos: number[][][];
}

export interface DemoEcho {
  index: number;
  trajectory: number[][];
}

export interface JobRecord {
  id: string;
  kind: string;
  status: "queued" | "running" | "done" | "failed";
  progress: number;
  /** Model id for training jobs, benchmark report for benchmark jobs. */
  result: string | Record<string, unknown> | null;
  error: string | null;
}

export interface GenerateResponse {
  trajectory: number[][];
  attention: number[][];
}
