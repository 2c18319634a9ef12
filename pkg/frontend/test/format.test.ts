import { describe, expect, it } from 'vitest';

import { countLabel, criterionLabel, fmtFixed, fmtNumber, propertySymbol } from '../src/format.js';
import type { CriterionPayload } from '../src/types.js';
import { fixture } from './helpers.js';

describe('criterionLabel', () => {
  it('renders the recorded fixture criterion as Θ_D > 800 K', () => {
    const criterion = fixture<CriterionPayload>('criterion');
    expect(criterionLabel(criterion)).toBe('Θ_D > 800 K');
  });

  it('uses the lexicon symbol for each known property', () => {
    const base = fixture<CriterionPayload>('criterion');
    expect(criterionLabel({ ...base, property_name: 'band_gap', comparator: '<', threshold: 1.5, unit: 'eV' })).toBe('E_g < 1.5 eV');
    expect(criterionLabel({ ...base, property_name: 'bulk_modulus', threshold: 250, unit: 'GPa' })).toBe('B > 250 GPa');
  });

  it('falls back to the raw property name', () => {
    expect(propertySymbol('hardness')).toBe('hardness');
    expect(propertySymbol('melting_point')).toBe('T_m');
    expect(propertySymbol('thermal_conductivity')).toBe('κ');
  });
});

describe('number formatting', () => {
  it('drops the fractional part of whole thresholds', () => {
    expect(fmtNumber(800.0)).toBe('800');
    expect(fmtNumber(0.05)).toBe('0.05');
    expect(fmtNumber(2245.940227519018)).toBe('2245.94');
  });

  it('pads table cells to fixed digits and blanks nulls', () => {
    expect(fmtFixed(1793.169601666882, 1)).toBe('1793.2');
    expect(fmtFixed(0.0031, 3)).toBe('0.003');
    expect(fmtFixed(null, 3)).toBe('');
  });
});

describe('countLabel', () => {
  it('turns state count keys into words', () => {
    expect(countLabel('n_passed_filters')).toBe('passed filters');
    expect(countLabel('n_documents')).toBe('documents');
  });
});
