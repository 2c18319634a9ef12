/** Distribution panel: overlaid histograms plus dashed KDE curves on shared
 * axes, a vertical line at the screening threshold, and per-series toggles.
 *
 * Everything drawn comes from the service payload. The KDE samples are used
 * as delivered (scaled by n * bin width so counts and densities share one
 * y axis); nothing is re-estimated client side.
 */

import { h } from './dom.js';
import { fmtNumber } from './format.js';
import type { DistributionPayload } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export const SERIES_COLORS: Record<string, string> = {
  database: '#4e79a7',
  literature: '#e8a33d',
  'generated-stable': '#2e8540',
};

const WIDTH = 720;
const HEIGHT = 360;
const MARGIN = { top: 20, right: 24, bottom: 48, left: 64 };

export interface ChartOptions {
  axisLabel?: string;
  thresholdLabel?: string;
  onToggle?: (name: string, visible: boolean) => void;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const el = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

function scale(d0: number, d1: number, r0: number, r1: number): (x: number) => number {
  const k = (r1 - r0) / (d1 - d0 || 1);
  return (x) => r0 + (x - d0) * k;
}

/** Tick positions on a 1/2/5 ladder, roughly n intervals. */
export function axisTicks(lo: number, hi: number, n: number): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const raw = span / Math.max(1, n);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n) ?? 10 * mag;
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + span * 1e-9; v += step) {
    out.push(parseFloat(v.toPrecision(12)));
  }
  return out;
}

function seriesNames(dist: DistributionPayload): string[] {
  return Object.keys(dist.series).sort();
}

export function renderChart(
  dist: DistributionPayload,
  visible: ReadonlySet<string>,
  opts: ChartOptions = {},
): SVGElement {
  const edges = dist.bin_edges;
  const lo = edges[0] ?? 0;
  const hi = edges[edges.length - 1] ?? 1;
  const binWidth = edges.length > 1 ? edges[1]! - edges[0]! : 1;
  const x = scale(lo, hi, MARGIN.left, WIDTH - MARGIN.right);

  let yMax = 0;
  for (const name of seriesNames(dist)) {
    if (!visible.has(name)) continue;
    const s = dist.series[name]!;
    yMax = Math.max(yMax, ...s.counts, ...s.kde.map((d) => d * s.n * binWidth));
  }
  yMax = yMax > 0 ? yMax * 1.05 : 1;
  const y = scale(0, yMax, HEIGHT - MARGIN.bottom, MARGIN.top);

  const svg = svgEl('svg', {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
    class: 'dist-chart',
    role: 'img',
  });

  // axes
  const axisY = HEIGHT - MARGIN.bottom;
  svg.append(
    svgEl('line', { x1: String(MARGIN.left), y1: String(axisY), x2: String(WIDTH - MARGIN.right), y2: String(axisY), class: 'axis' }),
    svgEl('line', { x1: String(MARGIN.left), y1: String(MARGIN.top), x2: String(MARGIN.left), y2: String(axisY), class: 'axis' }),
  );
  for (const t of axisTicks(lo, hi, 7)) {
    const tx = x(t);
    svg.append(svgEl('line', { x1: String(tx), y1: String(axisY), x2: String(tx), y2: String(axisY + 5), class: 'axis' }));
    const label = svgEl('text', { x: String(tx), y: String(axisY + 20), 'text-anchor': 'middle', class: 'tick' });
    label.textContent = fmtNumber(t);
    svg.append(label);
  }
  for (const t of axisTicks(0, yMax, 5)) {
    const ty = y(t);
    svg.append(svgEl('line', { x1: String(MARGIN.left - 5), y1: String(ty), x2: String(MARGIN.left), y2: String(ty), class: 'axis' }));
    const label = svgEl('text', { x: String(MARGIN.left - 9), y: String(ty + 4), 'text-anchor': 'end', class: 'tick' });
    label.textContent = fmtNumber(t);
    svg.append(label);
  }
  if (opts.axisLabel) {
    const label = svgEl('text', { x: String((MARGIN.left + WIDTH - MARGIN.right) / 2), y: String(HEIGHT - 10), 'text-anchor': 'middle', class: 'axis-label' });
    label.textContent = opts.axisLabel;
    svg.append(label);
  }
  const countLabel = svgEl('text', {
    x: '16',
    y: String((MARGIN.top + axisY) / 2),
    'text-anchor': 'middle',
    class: 'axis-label',
    transform: `rotate(-90 16 ${(MARGIN.top + axisY) / 2})`,
  });
  countLabel.textContent = 'count';
  svg.append(countLabel);

  // histogram bars, then KDE curves on top
  for (const name of seriesNames(dist)) {
    if (!visible.has(name)) continue;
    const s = dist.series[name]!;
    const color = SERIES_COLORS[name] ?? '#777777';
    for (let i = 0; i < s.counts.length; i++) {
      const count = s.counts[i]!;
      if (count === 0) continue;
      const x0 = x(edges[i]!);
      const x1 = x(edges[i + 1]!);
      svg.append(
        svgEl('rect', {
          x: x0.toFixed(2),
          y: y(count).toFixed(2),
          width: (x1 - x0).toFixed(2),
          height: (axisY - y(count)).toFixed(2),
          fill: color,
          'fill-opacity': '0.35',
          class: 'bar',
          'data-series': name,
          // bin bounds and count in data units, straight from the payload
          'data-x0': String(edges[i]),
          'data-x1': String(edges[i + 1]),
          'data-count': String(count),
        }),
      );
    }
    const points = dist.grid
      .map((g, i) => `${x(g).toFixed(2)},${y(s.kde[i]! * s.n * binWidth).toFixed(2)}`)
      .join(' ');
    svg.append(
      svgEl('polyline', {
        points,
        fill: 'none',
        stroke: color,
        'stroke-width': '2',
        'stroke-dasharray': '6 4',
        class: 'kde',
        'data-series': name,
      }),
    );
  }

  // screening threshold
  const tx = x(dist.criterion_threshold);
  svg.append(
    svgEl('line', {
      x1: tx.toFixed(2),
      y1: String(MARGIN.top),
      x2: tx.toFixed(2),
      y2: String(axisY),
      class: 'threshold',
      'data-threshold': String(dist.criterion_threshold),
    }),
  );
  const tLabel = svgEl('text', { x: (tx + 6).toFixed(2), y: String(MARGIN.top + 12), class: 'threshold-label' });
  tLabel.textContent = opts.thresholdLabel ?? fmtNumber(dist.criterion_threshold);
  svg.append(tLabel);

  return svg;
}

/** Legend + chart + empty-series notice. Toggles re-render from the same
 * payload via onToggle; they never trigger a refetch.
 */
export function buildDistributionPanel(
  dist: DistributionPayload,
  visible: ReadonlySet<string>,
  opts: ChartOptions = {},
): HTMLElement {
  const legend = h('div', { class: 'legend' });
  for (const name of seriesNames(dist)) {
    const box = h('input', { type: 'checkbox', 'data-series': name }) as HTMLInputElement;
    box.checked = visible.has(name);
    box.addEventListener('change', () => opts.onToggle?.(name, box.checked));
    const swatch = h('span', { class: 'swatch' });
    swatch.style.backgroundColor = SERIES_COLORS[name] ?? '#777777';
    legend.append(
      h('label', { class: 'series-toggle' }, box, swatch, `${name} (n=${dist.series[name]!.n})`),
    );
  }
  const panel = h('div', { class: 'dist-panel' }, legend, renderChart(dist, visible, opts));
  if (dist.empty_series.length) {
    panel.append(h('p', { class: 'notice' }, `no values recorded for: ${dist.empty_series.join(', ')}`));
  }
  return panel;
}
