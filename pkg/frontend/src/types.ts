// Server payload shapes. Everything the UI shows comes from these; the
// client never recomputes physics or metrics.

export type Vec2 = [number, number];

export interface MazePayload {
  text: string;
  width: number;
  height: number;
  doors: Record<string, [number, number]>; // door index -> [row, col]
  goal: [number, number];
  start: [number, number];
}

export interface SessionSnapshot {
  s: Vec2;
  visited: number[];
  steps: number;
  done: boolean;
  recorded: number;
}

export interface SessionCreated {
  id: string;
  maze: MazePayload;
  state: SessionSnapshot;
}

export interface StepFrame {
  s: Vec2;
  visited: number[];
  done: boolean;
  clamped_a: Vec2;
  error?: string;
}

export interface SaveResult {
  behavior: string;
  success: boolean;
  length: number;
  dataset_index?: number;
  path?: string;
}

export interface TrajectoryPayload {
  id: number;
  states: Vec2[];
  actions: Vec2[];
  checkpoints: number[];
  success: boolean;
}

export interface RolloutResult {
  trajectory: TrajectoryPayload;
  behavior: string;
  style_index: number;
  style_support: number[];
  seed: number;
}

export interface DatasetSummary {
  n: number;
  histogram: Record<string, number>;
  length_min: number;
  length_max: number;
  meta: Record<string, unknown>;
}

export interface ServerInfo {
  checkpoint: boolean;
  dataset: boolean;
  recording: boolean;
  n_styles: number | null;
  metrics: string[];
}
