/** Thin fetch client over the pipeline HTTP API. */

import type {
  CandidateRow,
  CreatedRun,
  CriterionPayload,
  DistributionPayload,
  ErrorPayload,
  RankedRow,
  RunStatePayload,
  RunSummary,
  StageStarted,
} from './types.js';

/** A non-2xx response; carries the service's {error, detail} body. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
    this.name = 'ServiceError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    let body: unknown = null;
    try {
      body = await res.json();
    } catch {
      // non-JSON body; fall through to the status check
    }
    if (!res.ok) {
      const err = (body ?? {}) as Partial<ErrorPayload>;
      throw new ServiceError(res.status, err.error ?? 'HttpError', err.detail ?? res.statusText);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  /** POST /runs; omitting config asks for the service's default run. */
  createRun(config?: Record<string, unknown>): Promise<CreatedRun> {
    return this.post('/runs', config ? { config } : {});
  }

  listRuns(): Promise<RunSummary[]> {
    return this.request('/runs');
  }

  getRun(runId: string): Promise<RunStatePayload> {
    return this.request(`/runs/${runId}`);
  }

  startStage(runId: string, stage: number): Promise<StageStarted> {
    return this.post(`/runs/${runId}/stages/${stage}`, {});
  }

  criterion(runId: string): Promise<CriterionPayload> {
    return this.request(`/runs/${runId}/criterion`);
  }

  stableCandidates(runId: string): Promise<RankedRow[]> {
    return this.request(`/runs/${runId}/candidates?status=stable`);
  }

  candidates(runId: string, status?: string): Promise<CandidateRow[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : '';
    return this.request(`/runs/${runId}/candidates${query}`);
  }

  distribution(runId: string): Promise<DistributionPayload> {
    return this.request(`/runs/${runId}/distribution`);
  }

  cifUrl(runId: string, candidateId: string): string {
    return `${this.base}/runs/${runId}/candidates/${candidateId}/cif`;
  }
}
