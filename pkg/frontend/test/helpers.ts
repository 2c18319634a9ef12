/** Shared test plumbing: recorded service payloads plus a fetch stub that
 * replays them, so every test runs against the same fixture service.
 */

import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import type { CreatedRun, RunStatePayload } from '../src/types.js';

export function fixture<T = unknown>(name: string): T {
  // the test runner's working directory is the frontend package root
  const file = join(process.cwd(), 'test', 'fixtures', `${name}.json`);
  return JSON.parse(readFileSync(file, 'utf8')) as T;
}

/** Run id of the recorded default fixture run. */
export const RUN_ID = fixture<CreatedRun>('created').run_id;

export interface Call {
  method: string;
  path: string;
  body: unknown;
}

interface Route {
  status: number;
  body: unknown;
}

export class FixtureService {
  readonly calls: Call[] = [];
  private readonly routes = new Map<string, Route>();

  on(method: string, path: string, body: unknown, status = 200): this {
    this.routes.set(`${method} ${path}`, { status, body });
    return this;
  }

  readonly fetch = (input: string, init?: RequestInit): Promise<Response> => {
    const method = (init?.method ?? 'GET').toUpperCase();
    const body = typeof init?.body === 'string' ? JSON.parse(init.body) : null;
    this.calls.push({ method, path: input, body });
    const route = this.routes.get(`${method} ${input}`);
    if (!route) {
      return Promise.resolve(jsonResponse({ error: 'NotFound', detail: input }, 404));
    }
    return Promise.resolve(jsonResponse(route.body, route.status));
  };
}

function jsonResponse(body: unknown, status: number): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

/** Fixture service preloaded with the finished default run. */
export function finishedRunService(): FixtureService {
  return new FixtureService()
    .on('GET', '/runs', fixture('runs'))
    .on('GET', `/runs/${RUN_ID}`, fixture<RunStatePayload>('state_done'))
    .on('GET', `/runs/${RUN_ID}/criterion`, fixture('criterion'))
    .on('GET', `/runs/${RUN_ID}/candidates?status=stable`, fixture('ranked'))
    .on('GET', `/runs/${RUN_ID}/candidates?status=rejected`, fixture('candidates_rejected'))
    .on('GET', `/runs/${RUN_ID}/distribution`, fixture('distribution'));
}

/** Let queued promise callbacks (fetch -> json -> render) settle. */
export async function flush(): Promise<void> {
  for (let i = 0; i < 10; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
