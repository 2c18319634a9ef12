import { describe, expect, it } from 'vitest';

import { ApiClient, ServiceError } from '../src/api.js';
import type { ErrorPayload, RankedRow, RunStatePayload } from '../src/types.js';
import { FixtureService, fixture, RUN_ID } from './helpers.js';

describe('ApiClient', () => {
  it('creates the default run with an empty body when no config is given', async () => {
    const service = new FixtureService().on('POST', '/runs', fixture('created'), 201);
    const api = new ApiClient('', service.fetch);
    const created = await api.createRun();
    expect(created.run_id).toBe(RUN_ID);
    expect(service.calls).toEqual([{ method: 'POST', path: '/runs', body: {} }]);
  });

  it('wraps overrides under the config key', async () => {
    const service = new FixtureService().on('POST', '/runs', fixture('created'), 201);
    const api = new ApiClient('', service.fetch);
    await api.createRun({ generation: { count: 8 } });
    expect(service.calls[0]?.body).toEqual({ config: { generation: { count: 8 } } });
  });

  it('fetches run state and the stable candidate list', async () => {
    const service = new FixtureService()
      .on('GET', `/runs/${RUN_ID}`, fixture('state_done'))
      .on('GET', `/runs/${RUN_ID}/candidates?status=stable`, fixture('ranked'));
    const api = new ApiClient('', service.fetch);

    const state = await api.getRun(RUN_ID);
    expect(state).toEqual(fixture<RunStatePayload>('state_done'));

    const ranked = await api.stableCandidates(RUN_ID);
    expect(ranked).toEqual(fixture<RankedRow[]>('ranked'));
    expect(service.calls.map((c) => c.path)).toEqual([
      `/runs/${RUN_ID}`,
      `/runs/${RUN_ID}/candidates?status=stable`,
    ]);
  });

  it('posts stage starts and returns the poll pointer', async () => {
    const service = new FixtureService().on('POST', `/runs/${RUN_ID}/stages/1`, fixture('stage_started'), 202);
    const api = new ApiClient('', service.fetch);
    const started = await api.startStage(RUN_ID, 1);
    expect(started.status).toBe('running');
    expect(started.poll).toBe(`/runs/${RUN_ID}`);
  });

  it('raises ServiceError carrying the recorded ordering-conflict payload', async () => {
    const recorded = fixture<ErrorPayload>('error_stage_order');
    const service = new FixtureService().on('POST', `/runs/${RUN_ID}/stages/2`, recorded, 409);
    const api = new ApiClient('', service.fetch);
    const err = await api.startStage(RUN_ID, 2).catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect((err as ServiceError).status).toBe(409);
    expect((err as ServiceError).error).toBe('StageOrderError');
    expect((err as ServiceError).detail).toBe(recorded.detail);
  });

  it('raises ServiceError for a distribution requested too early', async () => {
    const recorded = fixture<ErrorPayload>('error_not_ready');
    const service = new FixtureService().on('GET', `/runs/${RUN_ID}/distribution`, recorded, 409);
    const api = new ApiClient('', service.fetch);
    const err = await api.distribution(RUN_ID).catch((e: unknown) => e);
    expect((err as ServiceError).error).toBe('NotReady');
  });

  it('propagates network failures untouched', async () => {
    const api = new ApiClient('', () => Promise.reject(new TypeError('fetch failed')));
    await expect(api.listRuns()).rejects.toThrow('fetch failed');
  });

  it('builds CIF download links without fetching', () => {
    const service = new FixtureService();
    const api = new ApiClient('', service.fetch);
    expect(api.cifUrl(RUN_ID, 'cand-0001')).toBe(`/runs/${RUN_ID}/candidates/cand-0001/cif`);
    expect(service.calls).toHaveLength(0);
  });
});
