// Shapes of the gateway's JSON payloads, plus the client-side highlight model.

export interface RunInfo {
  id: string;
  name: string;
  source_lang: string;
  target_lang: string;
  created_at: string;
  metrics: string[];
  status: string;
  device_hints: string[];
  instances: number;
}

export interface InstancePayload {
  id: string;
  index: number;
  source: string | null;
  prediction: string;
  reference: string | null;
}

export interface AnnotationPayload {
  id: string;
  type: string;
  severity: string;
  span: [number, number] | null;
  explanation: string;
  origin: string;
}

export interface GroupMember {
  run_id: string;
  run_name: string;
  instance: InstancePayload;
  scores: Record<string, number>;
  annotations: AnnotationPayload[];
}

export interface InstanceGroup {
  group_key: string;
  source: string | null;
  reference: string | null;
  members: GroupMember[];
}

export interface SearchResponse {
  query: unknown;
  total_instances: number;
  total_groups: number;
  page: number;
  page_size: number;
  groups: InstanceGroup[];
  matched_error_ids: string[];
}

export interface HistogramBin {
  lower: number;
  upper: number;
  count: number;
}

export interface HistogramPayload {
  metric: string;
  lo: number;
  hi: number;
  bins: HistogramBin[];
  total: number;
}

export interface DashboardStats {
  run_id: string;
  run_name: string;
  corpus_bleu: number | null;
  mean_scores: Record<string, number>;
  score_counts: Record<string, number>;
  histograms: Record<string, HistogramPayload>;
  error_type_counts: [string, number][];
}

export interface JobPayload {
  id: string;
  run_id: string;
  state: string;
  total: number;
  completed: number;
  metrics: string[];
  diagnostics: string[];
}

export interface IngestPreview {
  run_id: string;
  dry_run?: boolean;
  extracted?: number;
  preview?: { source: string | null; prediction: string; reference: string | null }[];
  added?: number;
  total?: number;
}

/** One non-overlapping stretch of prediction text with a single visual kind. */
export interface HighlightSegment {
  start: number;
  end: number;
  kind: "major" | "minor" | "search_match";
  tooltip: TooltipPayload;
}

export interface TooltipPayload {
  error_type: string;
  severity: string;
  explanation: string;
}
