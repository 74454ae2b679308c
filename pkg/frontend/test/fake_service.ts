// Minimal in-memory stand-in for the campaign service, driven through a
// mocked fetch. Mirrors the wire contract the UI consumes: suggestion
// lifecycle, conflict on stale ids, estimate raster, metrics.

import type {
  CampaignDetail,
  CampaignEvent,
  EstimateRaster,
  MetricsResponse,
  ObservationBody,
  Suggestion,
} from '../src/types';

export class FakeService {
  detail: CampaignDetail;
  events: CampaignEvent[] = [];
  seq = 0;
  estimateReady = false;
  flipDecisions = false;
  requests: { method: string; path: string; body?: unknown }[] = [];

  constructor(episodes = 3) {
    this.detail = {
      id: 'camp',
      oracle: 'human',
      status: 'awaiting_observation',
      episode: 0,
      episodes_total: episodes,
      queries: 0,
      labeled_count: 0,
      bootstrap_done: false,
      suggestion: this.newSuggestion('bootstrap', 0),
      attractors: [
        { id: 0, location: [-0.612, 0] },
        { id: 1, location: [2.555, 0] },
      ],
      domain: { lower: [-8, -25], upper: [8, 25] },
    };
  }

  private newSuggestion(method: Suggestion['method'], episode: number): Suggestion {
    return {
      suggestion_id: `camp-${this.seq}`,
      state: [0.5 + 0.1 * this.seq, -1.0],
      method,
      episode,
    };
  }

  private applyObservation(body: ObservationBody): { status: number; payload: unknown } {
    const current = this.detail.suggestion;
    if (!current || body.suggestion_id !== current.suggestion_id) {
      return {
        status: 409,
        payload: { code: 'conflict', message: 'suggestion is not outstanding' },
      };
    }
    this.seq += 1;
    this.detail.queries += 1;
    const astCount = body.failed ? 0 : body.trajectory ? Math.max(1, Math.floor(body.trajectory.length / 10)) : 1;
    this.detail.labeled_count += astCount;
    this.events.push({
      type: body.failed ? 'failure' : this.detail.bootstrap_done ? 'episode' : 'bootstrap_query',
      episode: this.detail.episode,
      method: current.method,
      label: body.failed ? null : body.label!,
      ast_count: astCount,
      seq: this.events.length,
    });
    if (!body.failed && this.detail.queries >= 2) {
      this.detail.bootstrap_done = true;
      this.estimateReady = true;
    }
    if (this.detail.bootstrap_done) {
      this.detail.episode += 1;
    }
    if (this.detail.episode >= this.detail.episodes_total) {
      this.detail.status = 'finished';
      this.detail.suggestion = null;
    } else {
      this.detail.suggestion = this.newSuggestion(
        this.detail.bootstrap_done ? (this.detail.episode % 2 === 0 ? 'AL' : 'DBS') : 'bootstrap',
        this.detail.episode,
      );
    }
    return {
      status: 200,
      payload: {
        queries: this.detail.queries,
        labeled_count: this.detail.labeled_count,
        episode: this.detail.episode,
        status: this.detail.status,
        ast_count: astCount,
      },
    };
  }

  private estimate(resolution: number): { status: number; payload: unknown } {
    if (!this.estimateReady) {
      return { status: 409, payload: { code: 'not_ready', message: 'no classifier fitted yet' } };
    }
    const n = resolution;
    const decision: number[] = [];
    const labels: number[] = [];
    for (let ix = 0; ix < n; ix++) {
      for (let iv = 0; iv < n; iv++) {
        let d = (ix / (n - 1) - 0.5) * 2;
        if (this.flipDecisions) d = -d;
        decision.push(d);
        labels.push(d >= 0 ? 1 : 0);
      }
    }
    const raster: EstimateRaster = {
      resolution: n,
      xs: Array.from({ length: n }, (_, i) => -8 + (16 * i) / (n - 1)),
      vs: Array.from({ length: n }, (_, i) => -25 + (50 * i) / (n - 1)),
      decision,
      labels,
      samples: [
        { state: [-2, 0], label: 0, provenance: 'queried' },
        { state: [3, 5], label: 1, provenance: 'trajectory' },
      ],
      suggestion: this.detail.suggestion,
    };
    return { status: 200, payload: raster };
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? 'GET';
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ method, path, body });

    let result: { status: number; payload: unknown };
    if (method === 'GET' && /\/campaigns\/camp$/.test(path)) {
      result = { status: 200, payload: this.detail };
    } else if (method === 'GET' && path.includes('/estimate')) {
      const res = Number(new URLSearchParams(path.split('?')[1] ?? '').get('resolution') ?? 100);
      result = this.estimate(res);
    } else if (method === 'GET' && path.endsWith('/metrics')) {
      const payload: MetricsResponse = {
        events: this.events,
        f1: [],
        queries: this.detail.queries,
        labeled_count: this.detail.labeled_count,
      };
      result = { status: 200, payload };
    } else if (method === 'POST' && path.endsWith('/observations')) {
      result = this.applyObservation(body as ObservationBody);
    } else {
      result = { status: 404, payload: { code: 'not_found', message: `no route ${path}` } };
    }
    return new Response(JSON.stringify(result.payload), {
      status: result.status,
      headers: { 'Content-Type': 'application/json' },
    });
  };
}
