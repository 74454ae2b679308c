// Wire types mirroring the campaign service JSON.

export interface Suggestion {
  suggestion_id: string;
  state: [number, number];
  method: 'bootstrap' | 'AL' | 'DBS';
  episode: number;
}

export interface AttractorInfo {
  id: number;
  location: [number, number];
}

export interface DomainBox {
  lower: [number, number];
  upper: [number, number];
}

export interface CampaignDetail {
  id: string;
  oracle: 'simulated' | 'human';
  status: 'awaiting_observation' | 'ready' | 'finished';
  episode: number;
  episodes_total: number;
  queries: number;
  labeled_count: number;
  bootstrap_done: boolean;
  suggestion: Suggestion | null;
  attractors: AttractorInfo[];
  domain: DomainBox;
}

export interface SampleMarker {
  state: [number, number];
  label: number;
  provenance: 'queried' | 'trajectory';
}

export interface EstimateRaster {
  resolution: number;
  xs: number[];
  vs: number[];
  decision: number[];
  labels: number[];
  samples: SampleMarker[];
  suggestion: Suggestion | null;
}

export interface F1Point {
  queries: number;
  labeled: number;
  macro_f1: number;
}

export interface CampaignEvent {
  type: 'bootstrap_query' | 'episode' | 'failure';
  episode: number;
  method: string;
  label: number | null;
  ast_count: number;
  seq: number;
}

export interface MetricsResponse {
  events: CampaignEvent[];
  f1: F1Point[];
  queries: number;
  labeled_count: number;
}

export interface ObservationBody {
  suggestion_id: string;
  label?: number;
  trajectory?: number[][];
  failed?: boolean;
}

export interface ObservationResult {
  queries: number;
  labeled_count: number;
  episode: number;
  status: string;
  ast_count: number;
}
