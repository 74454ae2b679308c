// Typed client for the campaign service. Every view state change round-trips
// through these calls; the UI never mutates campaign state locally.

import type {
  CampaignDetail,
  EstimateRaster,
  MetricsResponse,
  ObservationBody,
  ObservationResult,
} from './types';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public field?: string,
  ) {
    super(message);
  }
}

async function request<T>(base: string, path: string, options?: RequestInit): Promise<T> {
  const response = await fetch(`${base}${path}`, {
    headers: { 'Content-Type': 'application/json' },
    ...options,
  });
  if (!response.ok) {
    let code = 'error';
    let message = response.statusText;
    let field: string | undefined;
    try {
      const body = await response.json();
      code = body.code ?? code;
      message = body.message ?? message;
      field = body.field ?? undefined;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, code, message, field);
  }
  return response.json() as Promise<T>;
}

export class CampaignApi {
  constructor(private base: string = '') {}

  getCampaign(id: string): Promise<CampaignDetail> {
    return request(this.base, `/campaigns/${encodeURIComponent(id)}`);
  }

  getEstimate(id: string, resolution: number): Promise<EstimateRaster> {
    return request(
      this.base,
      `/campaigns/${encodeURIComponent(id)}/estimate?resolution=${resolution}`,
    );
  }

  getMetrics(id: string): Promise<MetricsResponse> {
    return request(this.base, `/campaigns/${encodeURIComponent(id)}/metrics`);
  }

  submitObservation(id: string, body: ObservationBody): Promise<ObservationResult> {
    return request(this.base, `/campaigns/${encodeURIComponent(id)}/observations`, {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }
}
