/** Document shapes exchanged with the model service. */

export type JobState = 'idle' | 'running' | 'failed';

export type ConstraintKind = 'increase' | 'decrease' | 'convex' | 'concave';

export interface ConstraintDoc {
  feature: number;
  kind: ConstraintKind;
  range: [number, number];
  id: string;
  created_at: number;
}

export interface ModelInfo {
  model_id: string;
  dataset_id: string;
  state: JobState;
  error: string | null;
  revision: number;
  config: Record<string, unknown>;
  constraints: ConstraintDoc[];
  loss_trace: number[];
  feature_names: string[];
}

export interface SeriesWindow {
  revision: number;
  from_row: number;
  to_row: number;
  row_ids: string[];
  actual: number[];
  predicted: number[];
  ref_factor: string | null;
  ref_values: number[] | null;
  n_rows: number;
}

export interface ShapeDoc {
  revision: number;
  feature: string;
  anchors: number[];
  values: number[];
  edge_slopes: [number, number];
  density: { counts: number[]; mass: number[] };
  constraints: ConstraintDoc[];
}

export interface DatasetUploadResult {
  dataset_id: string;
  rows: number;
  feature_names: string[];
}

export type WeightOp = 'increase' | 'decrease';
