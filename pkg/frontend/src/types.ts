/** Payload shapes of the pipeline service, mirrored field for field. */

export type StageStatus = 'pending' | 'running' | 'done' | 'failed';

/** Keys are stage numbers as strings ("1".."3"), as the service emits them. */
export type StageMap = Record<string, StageStatus>;

export interface RunSummary {
  run_id: string;
  stages: StageMap;
}

export interface RunStatePayload {
  run_id: string;
  stages: StageMap;
  artifacts: Record<string, string[]>;
  counts: Record<string, number>;
  failures: Record<string, string>;
}

export interface CreatedRun {
  run_id: string;
  url: string;
}

export interface StageStarted {
  run_id: string;
  stage: number;
  status: 'running';
  poll: string;
}

export interface CriterionPayload {
  property_name: string;
  comparator: '>' | '<';
  threshold: number;
  unit: string;
  provenance: Record<string, number | string>;
}

export interface RankedRow {
  id: string;
  formula: string;
  predicted_theta_d: number;
  e_form: number;
  e_hull: number;
  cif: string;
}

export interface CandidateRow {
  id: string;
  parent_id: string;
  formula: string;
  status: string;
  reason: string | null;
  predicted_theta_d: number | null;
  e_form: number | null;
  e_hull: number | null;
  ops_log: [string, unknown][];
}

export interface SeriesSummary {
  counts: number[];
  kde: number[];
  n: number;
}

export interface DistributionPayload {
  bin_edges: number[];
  grid: number[];
  series: Record<string, SeriesSummary>;
  empty_series: string[];
  criterion_threshold: number;
}

export interface ErrorPayload {
  error: string;
  detail: string;
}
