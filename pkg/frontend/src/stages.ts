/** Stage-ordering rule, kept identical to the service's single-writer rule:
 * stage n needs stages 1..n-1 done, and nothing may run concurrently.
 */

import type { StageMap } from './types.js';

export const STAGES = [1, 2, 3] as const;

export const STAGE_TITLES: Record<number, string> = {
  1: 'Evidence',
  2: 'Labels',
  3: 'Candidates',
};

export const STAGE_SUMMARIES: Record<number, string> = {
  1: 'corpus to records to screening criterion',
  2: 'database + literature to trained predictor',
  3: 'generate, predict, screen, hull filter',
};

export function anyRunning(stages: StageMap): boolean {
  return STAGES.some((n) => stages[String(n)] === 'running');
}

/**
 * The one stage the operator may launch now, or null (a stage is running,
 * or the run is complete). Failed stages are re-launchable in place.
 */
export function nextEligibleStage(stages: StageMap): number | null {
  if (anyRunning(stages)) return null;
  for (const n of STAGES) {
    if (stages[String(n)] !== 'done') return n;
  }
  return null;
}
