import { describe, expect, it } from 'vitest';

import { anyRunning, nextEligibleStage, STAGES } from '../src/stages.js';
import type { RunStatePayload } from '../src/types.js';
import { fixture } from './helpers.js';

const state = (name: string) => fixture<RunStatePayload>(name).stages;

describe('nextEligibleStage over recorded run states', () => {
  it('fresh run: only stage 1', () => {
    expect(nextEligibleStage(state('state_fresh'))).toBe(1);
  });

  it('stage 1 done: only stage 2', () => {
    expect(nextEligibleStage(state('state_stage1'))).toBe(2);
  });

  it('stage 2 done: only stage 3', () => {
    expect(nextEligibleStage(state('state_stage2'))).toBe(3);
  });

  it('a running stage blocks every launch', () => {
    const stages = state('state_running');
    expect(anyRunning(stages)).toBe(true);
    expect(nextEligibleStage(stages)).toBeNull();
  });

  it('finished run: nothing left to launch', () => {
    expect(nextEligibleStage(state('state_done'))).toBeNull();
  });

  it('failed stage is relaunchable in place', () => {
    expect(nextEligibleStage(state('state_failed'))).toBe(1);
  });
});

describe('ordering rule invariant', () => {
  const recorded = ['state_fresh', 'state_stage1', 'state_stage2', 'state_running', 'state_done', 'state_failed'];

  it('an eligible stage always has all predecessors done and nothing running', () => {
    for (const name of recorded) {
      const stages = state(name);
      const eligible = nextEligibleStage(stages);
      if (eligible === null) continue;
      expect(anyRunning(stages)).toBe(false);
      for (const n of STAGES) {
        if (n < eligible) expect(stages[String(n)]).toBe('done');
      }
    }
  });
});
