import { describe, expect, it, vi } from 'vitest';

import { axisTicks, buildDistributionPanel, renderChart } from '../src/chart.js';
import type { DistributionPayload } from '../src/types.js';
import { fixture } from './helpers.js';

const dist = () => fixture<DistributionPayload>('distribution');
const allSeries = (d: DistributionPayload) => new Set(Object.keys(d.series));

function bars(svg: SVGElement, series: string): SVGRectElement[] {
  return Array.from(svg.querySelectorAll(`rect.bar[data-series="${series}"]`)) as SVGRectElement[];
}

describe('renderChart', () => {
  it('draws every populated series as bars plus a dashed KDE curve', () => {
    const d = dist();
    const svg = renderChart(d, allSeries(d));
    for (const [name, series] of Object.entries(d.series)) {
      const nonzero = series.counts.filter((c) => c > 0).length;
      expect(bars(svg, name)).toHaveLength(nonzero);
      const kde = svg.querySelector(`polyline.kde[data-series="${name}"]`);
      expect(kde).not.toBeNull();
      expect(kde!.getAttribute('stroke-dasharray')).toBe('6 4');
    }
  });

  it('shows the stable series concentrated in 1500-1700 K', () => {
    const d = dist();
    const svg = renderChart(d, allSeries(d));
    const stable = bars(svg, 'generated-stable');
    expect(stable.length).toBeGreaterThan(0);

    let total = 0;
    let inWindow = 0;
    for (const bar of stable) {
      const x0 = Number(bar.getAttribute('data-x0'));
      const x1 = Number(bar.getAttribute('data-x1'));
      const count = Number(bar.getAttribute('data-count'));
      total += count;
      const center = (x0 + x1) / 2;
      if (center >= 1500 && center <= 1700) inWindow += count;
    }
    expect(total).toBe(d.series['generated-stable']!.n);
    expect(inWindow / total).toBeGreaterThanOrEqual(0.8);
  });

  it('places the threshold line at the criterion value', () => {
    const d = dist();
    const svg = renderChart(d, allSeries(d), { thresholdLabel: 'Θ_D > 800 K' });
    const line = svg.querySelector('line.threshold');
    expect(line).not.toBeNull();
    expect(line!.getAttribute('data-threshold')).toBe('800');
    expect(svg.querySelector('text.threshold-label')!.textContent).toBe('Θ_D > 800 K');
  });

  it('hidden series leave no marks', () => {
    const d = dist();
    const svg = renderChart(d, new Set(['literature']));
    expect(bars(svg, 'literature').length).toBeGreaterThan(0);
    expect(bars(svg, 'database')).toHaveLength(0);
    expect(bars(svg, 'generated-stable')).toHaveLength(0);
    expect(svg.querySelectorAll('polyline.kde')).toHaveLength(1);
  });

  it('matches the recorded-run snapshot', () => {
    const d = dist();
    const svg = renderChart(d, allSeries(d), { axisLabel: 'Θ_D (K)', thresholdLabel: 'Θ_D > 800 K' });
    expect(svg.outerHTML).toMatchSnapshot();
  });
});

describe('buildDistributionPanel', () => {
  it('renders one toggle per series and reports toggles without refetching', () => {
    const d = dist();
    const onToggle = vi.fn();
    const panel = buildDistributionPanel(d, allSeries(d), { onToggle });
    const boxes = Array.from(panel.querySelectorAll('input[type="checkbox"]')) as HTMLInputElement[];
    expect(boxes.map((b) => b.getAttribute('data-series'))).toEqual(['database', 'generated-stable', 'literature']);

    const box = boxes[0]!;
    box.checked = false;
    box.dispatchEvent(new Event('change'));
    expect(onToggle).toHaveBeenCalledWith('database', false);
  });

  it('renders the remaining series plus a notice when the stable set is empty', () => {
    const d = fixture<DistributionPayload>('distribution_empty');
    const panel = buildDistributionPanel(d, allSeries(d));
    expect(panel.querySelectorAll('polyline.kde')).toHaveLength(2);
    expect(panel.querySelector('.notice')!.textContent).toBe('no values recorded for: generated-stable');
    expect(panel.outerHTML).toMatchSnapshot();
  });
});

describe('axisTicks', () => {
  it('picks round steps covering the span', () => {
    expect(axisTicks(0, 10, 5)).toEqual([0, 2, 4, 6, 8, 10]);
    expect(axisTicks(105, 2245.94, 7)).toEqual([500, 1000, 1500, 2000]);
    expect(axisTicks(0, 1, 4)).toEqual([0, 0.5, 1]);
  });

  it('degenerates gracefully', () => {
    expect(axisTicks(5, 5, 4)).toEqual([5]);
  });
});
