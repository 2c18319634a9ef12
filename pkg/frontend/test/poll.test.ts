import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { Poller } from '../src/poll.js';

describe('Poller', () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it('ticks once per interval after start', async () => {
    let ticks = 0;
    const poller = new Poller(async () => {
      ticks += 1;
    }, 2000);
    poller.start();
    expect(ticks).toBe(0);
    await vi.advanceTimersByTimeAsync(2000);
    expect(ticks).toBe(1);
    await vi.advanceTimersByTimeAsync(6000);
    expect(ticks).toBe(4);
    poller.stop();
    await vi.advanceTimersByTimeAsync(4000);
    expect(ticks).toBe(4);
  });

  it('coalesces: interval firings during an in-flight tick are dropped', async () => {
    let ticks = 0;
    let release: () => void = () => {};
    const poller = new Poller(() => {
      ticks += 1;
      return new Promise<void>((resolve) => {
        release = resolve;
      });
    }, 2000);
    poller.start();
    await vi.advanceTimersByTimeAsync(2000); // first tick, stays in flight
    await vi.advanceTimersByTimeAsync(8000); // four more firings, all dropped
    expect(ticks).toBe(1);
    release();
    await vi.advanceTimersByTimeAsync(2000);
    expect(ticks).toBe(2);
    poller.stop();
    release();
  });

  it('keeps polling after a failed tick', async () => {
    let calls = 0;
    const poller = new Poller(() => {
      calls += 1;
      return calls === 1 ? Promise.reject(new Error('transient')) : Promise.resolve();
    }, 2000);
    poller.start();
    await vi.advanceTimersByTimeAsync(4000);
    expect(calls).toBe(2);
    poller.stop();
  });

  it('start is idempotent while running', async () => {
    let ticks = 0;
    const poller = new Poller(async () => {
      ticks += 1;
    }, 2000);
    poller.start();
    poller.start();
    await vi.advanceTimersByTimeAsync(2000);
    expect(ticks).toBe(1);
    expect(poller.running).toBe(true);
    poller.stop();
    expect(poller.running).toBe(false);
  });
});
