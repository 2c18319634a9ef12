/** Display formatting. Values always come from service payloads; these
 * helpers only choose symbols and digits, never recompute science.
 */

import type { CriterionPayload } from './types.js';

const PROPERTY_SYMBOLS: Record<string, string> = {
  debye_temperature: 'Θ_D',
  thermal_conductivity: 'κ',
  band_gap: 'E_g',
  bulk_modulus: 'B',
  melting_point: 'T_m',
};

export function propertySymbol(name: string): string {
  return PROPERTY_SYMBOLS[name] ?? name;
}

/** Compact number: integers bare, everything else trimmed of zero tails. */
export function fmtNumber(x: number): string {
  if (Number.isInteger(x)) return String(x);
  return String(parseFloat(x.toPrecision(6)));
}

export function fmtFixed(x: number | null, digits: number): string {
  return x === null ? '' : x.toFixed(digits);
}

/** "Θ_D > 800 K" */
export function criterionLabel(c: CriterionPayload): string {
  return `${propertySymbol(c.property_name)} ${c.comparator} ${fmtNumber(c.threshold)} ${c.unit}`;
}

/** "n documents" -> human label for a state.counts key. */
export function countLabel(key: string): string {
  return key.replace(/^n_/, '').replace(/_/g, ' ');
}
