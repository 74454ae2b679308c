// Progress chart: labeled-sample count per episode event, plus the macro-F1
// series when the campaign tracks one. Rendered as an inline SVG.

import type { MetricsResponse } from './types';

const WIDTH = 420;
const HEIGHT = 140;
const PAD = 24;

function polyline(points: [number, number][], stroke: string): SVGPolylineElement {
  const el = document.createElementNS('http://www.w3.org/2000/svg', 'polyline');
  el.setAttribute('points', points.map(([x, y]) => `${x},${y}`).join(' '));
  el.setAttribute('fill', 'none');
  el.setAttribute('stroke', stroke);
  el.setAttribute('stroke-width', '2');
  return el;
}

export function renderMetrics(container: HTMLElement, metrics: MetricsResponse): void {
  container.replaceChildren();
  const events = metrics.events.filter((e) => e.type !== 'failure');
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute('class', 'metrics-chart');

  if (events.length === 0) {
    container.appendChild(svg);
    return;
  }

  let labeled = 0;
  const counts: number[] = [];
  for (const ev of events) {
    labeled += ev.ast_count;
    counts.push(labeled);
  }
  const maxCount = Math.max(...counts);
  const xAt = (i: number) =>
    PAD + (events.length === 1 ? 0 : (i / (events.length - 1)) * (WIDTH - 2 * PAD));
  const yAt = (v: number, maxV: number) =>
    HEIGHT - PAD - (maxV > 0 ? (v / maxV) * (HEIGHT - 2 * PAD) : 0);

  const countPoints: [number, number][] = counts.map((c, i) => [xAt(i), yAt(c, maxCount)]);
  svg.appendChild(polyline(countPoints, '#1f77b4'));
  for (const [x, y] of countPoints) {
    const dot = document.createElementNS('http://www.w3.org/2000/svg', 'circle');
    dot.setAttribute('cx', String(x));
    dot.setAttribute('cy', String(y));
    dot.setAttribute('r', '3');
    dot.setAttribute('class', 'metrics-point');
    dot.setAttribute('fill', '#1f77b4');
    svg.appendChild(dot);
  }

  if (metrics.f1.length > 0) {
    const f1Points: [number, number][] = metrics.f1.map((p, i) => [
      xAt(Math.min(i, events.length - 1)),
      yAt(p.macro_f1, 1.0),
    ]);
    svg.appendChild(polyline(f1Points, '#2ca02c'));
  }

  container.appendChild(svg);
  const caption = document.createElement('div');
  caption.className = 'metrics-caption';
  caption.textContent = `${labeled} labeled samples from ${metrics.queries} queries`;
  container.appendChild(caption);
}
