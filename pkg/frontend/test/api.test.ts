// @vitest-environment jsdom
import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiError, CampaignApi } from '../src/api';

afterEach(() => vi.unstubAllGlobals());

function stubOnce(status: number, payload: unknown): void {
  vi.stubGlobal(
    'fetch',
    vi.fn(async () =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { 'Content-Type': 'application/json' },
      }),
    ),
  );
}

describe('CampaignApi', () => {
  it('returns parsed JSON on success', async () => {
    stubOnce(200, { id: 'c', queries: 3 });
    const api = new CampaignApi('');
    const detail = await api.getCampaign('c');
    expect(detail.queries).toBe(3);
  });

  it('maps service errors to ApiError with code and field', async () => {
    stubOnce(422, { code: 'validation', message: 'label 9 not allowed', field: 'label' });
    const api = new CampaignApi('');
    const err = await api
      .submitObservation('c', { suggestion_id: 's', label: 9 })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.code).toBe('validation');
    expect(err.field).toBe('label');
  });

  it('tolerates non-JSON error bodies', async () => {
    vi.stubGlobal(
      'fetch',
      vi.fn(async () => new Response('gateway exploded', { status: 502, statusText: 'Bad Gateway' })),
    );
    const api = new CampaignApi('');
    const err = await api.getMetrics('c').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(502);
  });

  it('hits the documented routes', async () => {
    const calls: string[] = [];
    vi.stubGlobal(
      'fetch',
      vi.fn(async (url: RequestInfo | URL) => {
        calls.push(String(url));
        return new Response('{}', { status: 200, headers: { 'Content-Type': 'application/json' } });
      }),
    );
    const api = new CampaignApi('http://svc:1');
    await api.getCampaign('a b');
    await api.getEstimate('a b', 40);
    await api.getMetrics('a b');
    await api.submitObservation('a b', { suggestion_id: 's' });
    expect(calls).toEqual([
      'http://svc:1/campaigns/a%20b',
      'http://svc:1/campaigns/a%20b/estimate?resolution=40',
      'http://svc:1/campaigns/a%20b/metrics',
      'http://svc:1/campaigns/a%20b/observations',
    ]);
  });
});
