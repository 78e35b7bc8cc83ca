/** Wire types for the biaslens HTTP/JSON API. */

export type MetricKind = "npmi" | "pmi" | "jaccard" | "dice";

export interface DirectionSelector {
  type: "direction";
  attribute: string;
  direction: string;
  metric_kind: MetricKind;
}

export interface DiffSelector {
  type: "diff";
  attribute: string;
  positive_direction: string;
  negative_direction: string;
  metric_kind: MetricKind;
}

export type Selector = DirectionSelector | DiffSelector;

export interface MetricFilter {
  selector: Selector;
  low: number;
  high: number;
}

export interface SortSpec {
  by: "metric" | "similarity";
  selector?: Selector | null;
  anchor_label?: string | null;
  descending: boolean;
}

export interface QueryRequest {
  filters: MetricFilter[];
  sort?: SortSpec | null;
  include_hidden?: boolean;
  embedding_selection?: string[] | null;
  active_runs?: string[] | null;
  columns?: Selector[] | null;
  offset?: number;
  limit?: number;
}

export interface MetricCell {
  value: number | null;
  joint_count?: number;
  label_count?: number;
  direction_count?: number;
}

export interface AnnotationRow {
  label: string;
  /** run name -> selector key -> cell */
  cells: Record<string, Record<string, MetricCell>>;
  flagged: boolean;
  hidden: boolean;
  sort_key: number | null;
}

export interface QueryResponse {
  rows: AnnotationRow[];
  total_matching: number;
  revision: number;
}

export interface RunInfo {
  run_name: string;
  color_index: number;
  total_points: number;
}

export interface AttributeInfo {
  name: string;
  directions: string[];
}

export interface WorkspaceInfo {
  workspace_id: string;
  runs: RunInfo[];
  attributes: AttributeInfo[];
  metric_kinds: MetricKind[];
  vocabulary_size: number;
  embedding_available: boolean;
  revision: number;
}

export interface DensityCurve {
  run: string;
  selector: string;
  grid: number[];
  densities: number[];
  sample_count: number;
}

export interface DistributionResponse {
  curves: DensityCurve[];
  domain: number[];
}

export interface ProjectionRequest {
  filters?: MetricFilter[];
  active_runs?: string[] | null;
  selector?: Selector | null;
  seed?: number;
  bandwidth?: number;
  include_hidden?: boolean;
}

export interface ProjectionLayout {
  /** label -> [x, y] in the unit square */
  points: Record<string, [number, number]>;
  subset_hash: string;
  missing: string[];
  parameters: { neighbor_count: number; min_dist: number; seed: number };
}

export interface HeatmapPayload {
  width: number;
  height: number;
  bandwidth: number;
  /** row-major, length width * height */
  intensities: number[];
}

export interface ProjectionPending {
  status: "pending";
}

export interface ProjectionReady {
  status: "ready";
  projection: ProjectionLayout;
  heatmap: HeatmapPayload;
  /** label -> value used for the heatmap */
  values: Record<string, number>;
}

export type ProjectionResponse = ProjectionPending | ProjectionReady;

export type SessionAction = "flag" | "unflag" | "hide" | "unhide";

export interface SessionRequest {
  action: SessionAction;
  labels: string[];
  expected_revision: number;
}

export interface SessionResponse {
  workspace_id: string;
  revision: number;
  flagged: string[];
  hidden: string[];
}
