/** Wire types mirroring the service's JSON bodies. */

export const STEP_NAMES = [
  "requirement-recognition",
  "feature-identification",
  "metrics-benchmarks-listing",
  "metrics-benchmarks-selection",
  "factors-listing",
  "factors-selection",
  "experimental-design",
  "experimental-implementation",
  "experimental-analysis",
  "conclusion-documentation",
] as const;

export type StepName = (typeof STEP_NAMES)[number];

export const STEP_TITLES: Record<StepName, string> = {
  "requirement-recognition": "Requirement recognition",
  "feature-identification": "Feature identification",
  "metrics-benchmarks-listing": "Metrics & benchmarks listing",
  "metrics-benchmarks-selection": "Metrics & benchmarks selection",
  "factors-listing": "Factors listing",
  "factors-selection": "Factors selection",
  "experimental-design": "Experimental design",
  "experimental-implementation": "Experimental implementation",
  "experimental-analysis": "Experimental analysis",
  "conclusion-documentation": "Conclusion & documentation",
};

export const ITERATION_STEPS: ReadonlySet<StepName> = new Set([
  "experimental-design",
  "experimental-implementation",
  "experimental-analysis",
]);

export interface StepRecordView {
  step: StepName;
  iteration: number;
  input_digest: string;
  payload: Record<string, unknown>;
  completed_at: string;
  operator: string;
}

export interface LogEntryView {
  timestamp: string;
  step: string | null;
  iteration: number;
  action: string;
  detail: string;
  attachments: string[];
}

export interface ProjectView {
  id: string;
  bundle_domain: string;
  bundle_version: string;
  problem: string;
  seed: number;
  iteration: number;
  concluded: boolean;
  records: StepRecordView[];
  log: LogEntryView[];
  pending_runs: Record<string, unknown>[];
  campaign_environment: Record<string, unknown> | null;
  campaign_adapter: Record<string, unknown> | null;
  event_count: number;
  content_digest?: string;
}

export interface MetricView {
  name: string;
  unit: string;
  direction: "higher-better" | "lower-better";
}

export interface CatalogueEntryView {
  feature_id: string;
  metric: MetricView;
  benchmarks: { name: string; source: string }[];
  metric_only: boolean;
}

export interface TaxonomyElementView {
  id: string;
  kind: string;
  name: string;
  definition: string;
  parent: string | null;
  keywords: string[];
}

export interface FactorNodeView {
  id: string;
  kind: string;
  name: string;
  sub_kind: string | null;
  children: string[];
  value_domain: string;
  applies_to: string[];
}

export interface FactorCandidatesView {
  resource: FactorNodeView[];
  workload: FactorNodeView[];
  quality: string[];
}

export interface ChartSeriesEntry {
  name: string;
  points: [string | number, number][];
}

export interface ChartSeriesPayload {
  kind: string;
  title: string;
  x_label: string;
  y_label: string;
  unit: string;
  series: ChartSeriesEntry[];
  meta: Record<string, unknown>;
}

export interface DesignFactorInput {
  name: string;
  kind: string;
  levels: (string | number)[];
  role: string;
}

export interface DesignSpecInput {
  factors: DesignFactorInput[];
  replicates: number;
  seed: number;
  response_metrics: string[];
  blocking?: DesignFactorInput | null;
}

export interface AdapterInput {
  name: string;
  command: string;
  timeout: number;
  version?: string;
  rules: {
    metric: string;
    unit?: string;
    pattern?: string;
    field_index?: number;
    delimiter?: string;
  }[];
}
