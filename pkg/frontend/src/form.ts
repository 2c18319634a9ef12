/** Create-run form model: which knobs exist, how they validate, and how
 * filled fields become a config override. An untouched form sends no config
 * at all, so the service runs its documented defaults.
 */

export interface FieldSpec {
  key: string;
  label: string;
  placeholder: string;
  /** config section; query lives at the top level */
  section: 'query' | 'evidence' | 'generation' | 'predictor' | 'stability';
  /** config key inside the section */
  name: string;
  kind: 'text' | 'int' | 'float';
}

export const FORM_FIELDS: FieldSpec[] = [
  { key: 'query', label: 'objective', placeholder: 'e.g. materials with a high Debye temperature', section: 'query', name: 'query', kind: 'text' },
  { key: 'window', label: 'chunk window', placeholder: '500', section: 'evidence', name: 'window', kind: 'int' },
  { key: 'overlap', label: 'chunk overlap', placeholder: '100', section: 'evidence', name: 'overlap', kind: 'int' },
  { key: 'p_sub', label: 'substitution rate p', placeholder: '0.15', section: 'generation', name: 'p_sub', kind: 'float' },
  { key: 'sigma', label: 'perturbation σ (Å)', placeholder: '0.03', section: 'generation', name: 'sigma', kind: 'float' },
  { key: 'count', label: 'candidate count', placeholder: '64', section: 'generation', name: 'count', kind: 'int' },
  { key: 'seed', label: 'generation seed', placeholder: '', section: 'generation', name: 'seed', kind: 'int' },
  { key: 'ridge_lambda', label: 'ridge λ', placeholder: '', section: 'predictor', name: 'ridge_lambda', kind: 'float' },
  { key: 'threshold', label: 'hull threshold (eV/atom)', placeholder: '0.05', section: 'stability', name: 'threshold', kind: 'float' },
];

export type FormValues = Record<string, string>;

function parsed(spec: FieldSpec, raw: string): number | null {
  const x = Number(raw);
  if (!Number.isFinite(x)) return null;
  if (spec.kind === 'int' && !Number.isInteger(x)) return null;
  return x;
}

// mirrors the service-side config bounds so mistakes surface before a request
const RANGE_RULES: Record<string, (x: number) => string | null> = {
  window: (x) => (x >= 1 ? null : 'must be at least 1'),
  overlap: (x) => (x >= 0 ? null : 'must not be negative'),
  p_sub: (x) => (x >= 0 && x <= 1 ? null : 'must lie in [0, 1]'),
  sigma: (x) => (x >= 0 ? null : 'must not be negative'),
  count: (x) => (x >= 1 ? null : 'must be at least 1'),
  ridge_lambda: (x) => (x >= 0 ? null : 'must not be negative'),
  threshold: (x) => (x > 0 ? null : 'must be positive'),
};

/** Field-level problems; an empty map means the form may be submitted. */
export function validateForm(values: FormValues): Record<string, string> {
  const errors: Record<string, string> = {};
  for (const spec of FORM_FIELDS) {
    const raw = (values[spec.key] ?? '').trim();
    if (!raw || spec.kind === 'text') continue;
    const x = parsed(spec, raw);
    if (x === null) {
      errors[spec.key] = spec.kind === 'int' ? 'must be an integer' : 'must be a number';
      continue;
    }
    const problem = RANGE_RULES[spec.key]?.(x);
    if (problem) errors[spec.key] = problem;
  }
  const window = (values['window'] ?? '').trim();
  const overlap = (values['overlap'] ?? '').trim();
  if (window && overlap && !errors['window'] && !errors['overlap']) {
    if (Number(overlap) >= Number(window)) {
      errors['overlap'] = 'overlap must be smaller than window';
    }
  }
  return errors;
}

/**
 * Filled fields as a config override, or null when everything is untouched
 * (the caller then posts without a config). Call validateForm first.
 */
export function collectOverrides(values: FormValues): Record<string, unknown> | null {
  const config: Record<string, unknown> = {};
  for (const spec of FORM_FIELDS) {
    const raw = (values[spec.key] ?? '').trim();
    if (!raw) continue;
    if (spec.section === 'query') {
      config['query'] = raw;
      continue;
    }
    const section = (config[spec.section] ??= {}) as Record<string, unknown>;
    section[spec.name] = parsed(spec, raw);
  }
  return Object.keys(config).length ? config : null;
}
