// DOM-grid heatmap of the decision-value raster, with labeled-sample markers
// and a crosshair on the suggested next state. Pure render functions: output
// is derived entirely from the raster payload.

import type { DomainBox, EstimateRaster, SampleMarker, Suggestion } from './types';

// Basin colors: negative decision values (class 0) shade blue, positive
// (class 1) shade orange; intensity follows |decision| relative to the
// raster's own maximum.
const NEG_RGB: [number, number, number] = [31, 119, 180];
const POS_RGB: [number, number, number] = [255, 127, 14];

export function cellColor(decision: number, maxAbs: number): string {
  const base = decision < 0 ? NEG_RGB : POS_RGB;
  const t = maxAbs > 0 ? Math.min(Math.abs(decision) / maxAbs, 1) : 0;
  // blend from near-white toward the basin color
  const mix = base.map((c) => Math.round(255 - (255 - c) * (0.25 + 0.75 * t)));
  return `rgb(${mix[0]}, ${mix[1]}, ${mix[2]})`;
}

function positionPercent(state: [number, number], domain: DomainBox): [number, number] {
  const px = ((state[0] - domain.lower[0]) / (domain.upper[0] - domain.lower[0])) * 100;
  const pv = ((state[1] - domain.lower[1]) / (domain.upper[1] - domain.lower[1])) * 100;
  return [px, 100 - pv]; // v axis points up, screen y points down
}

export function renderPlaceholder(container: HTMLElement, message: string): void {
  container.replaceChildren();
  const note = document.createElement('div');
  note.className = 'heatmap-placeholder';
  note.textContent = message;
  container.appendChild(note);
}

export function renderEstimate(
  container: HTMLElement,
  raster: EstimateRaster,
  domain: DomainBox,
): void {
  container.replaceChildren();
  const n = raster.resolution;
  const grid = document.createElement('div');
  grid.className = 'heatmap-grid';
  grid.style.display = 'grid';
  grid.style.gridTemplateColumns = `repeat(${n}, 1fr)`;
  grid.style.gridTemplateRows = `repeat(${n}, 1fr)`;

  const maxAbs = raster.decision.reduce((m, d) => Math.max(m, Math.abs(d)), 0);
  // raster is row-major with x as the slow axis; screen rows run top (+v) down
  for (let iv = n - 1; iv >= 0; iv--) {
    for (let ix = 0; ix < n; ix++) {
      const d = raster.decision[ix * n + iv];
      const cell = document.createElement('div');
      cell.className = 'heatmap-cell';
      cell.dataset.decision = String(d);
      cell.dataset.label = String(raster.labels[ix * n + iv]);
      cell.style.backgroundColor = cellColor(d, maxAbs);
      grid.appendChild(cell);
    }
  }
  container.appendChild(grid);

  const overlay = document.createElement('div');
  overlay.className = 'heatmap-overlay';
  for (const sample of raster.samples) {
    overlay.appendChild(sampleMarker(sample, domain));
  }
  if (raster.suggestion) {
    overlay.appendChild(crosshair(raster.suggestion, domain));
  }
  container.appendChild(overlay);
}

function sampleMarker(sample: SampleMarker, domain: DomainBox): HTMLElement {
  const dot = document.createElement('div');
  dot.className = `sample-marker ${sample.provenance} label-${sample.label}`;
  dot.title = `(${sample.state[0].toFixed(3)}, ${sample.state[1].toFixed(3)}) → ${sample.label}`;
  const [px, py] = positionPercent(sample.state, domain);
  dot.style.left = `${px}%`;
  dot.style.top = `${py}%`;
  return dot;
}

function crosshair(suggestion: Suggestion, domain: DomainBox): HTMLElement {
  const mark = document.createElement('div');
  mark.className = 'suggestion-crosshair';
  mark.textContent = '+';
  mark.title = `next: (${suggestion.state[0].toFixed(3)}, ${suggestion.state[1].toFixed(3)})`;
  const [px, py] = positionPercent(suggestion.state, domain);
  mark.style.left = `${px}%`;
  mark.style.top = `${py}%`;
  return mark;
}
