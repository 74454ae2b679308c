// @vitest-environment jsdom
import { describe, expect, it } from 'vitest';

import { cellColor, renderEstimate, renderPlaceholder } from '../src/heatmap';
import type { DomainBox, EstimateRaster } from '../src/types';

const domain: DomainBox = { lower: [-8, -25], upper: [8, 25] };

function raster(decision: number[], n: number): EstimateRaster {
  return {
    resolution: n,
    xs: Array.from({ length: n }, (_, i) => -8 + (16 * i) / (n - 1)),
    vs: Array.from({ length: n }, (_, i) => -25 + (50 * i) / (n - 1)),
    decision,
    labels: decision.map((d) => (d >= 0 ? 1 : 0)),
    samples: [
      { state: [-2, 0], label: 0, provenance: 'queried' },
      { state: [3, 5], label: 1, provenance: 'trajectory' },
    ],
    suggestion: {
      suggestion_id: 's-1',
      state: [0, 0],
      method: 'AL',
      episode: 2,
    },
  };
}

describe('renderEstimate', () => {
  it('renders one cell per raster node for a 2x2 raster', () => {
    const box = document.createElement('div');
    renderEstimate(box, raster([-1, -0.5, 0.5, 1], 2), domain);
    expect(box.querySelectorAll('.heatmap-cell')).toHaveLength(4);
  });

  it('flipping decision signs swaps colors and nothing else', () => {
    const d = [-1, -0.25, 0.25, 1];
    const a = document.createElement('div');
    renderEstimate(a, raster(d, 2), domain);
    const b = document.createElement('div');
    renderEstimate(b, raster(d.map((v) => -v), 2), domain);
    const colorsA = [...a.querySelectorAll<HTMLElement>('.heatmap-cell')].map(
      (c) => c.style.backgroundColor,
    );
    const colorsB = [...b.querySelectorAll<HTMLElement>('.heatmap-cell')].map(
      (c) => c.style.backgroundColor,
    );
    // same |decision| means the palettes swap pairwise between the runs
    colorsA.forEach((color, i) => {
      const dec = Number(
        [...a.querySelectorAll<HTMLElement>('.heatmap-cell')][i].dataset.decision,
      );
      expect(color).toBe(cellColor(dec, 1));
      expect(colorsB[i]).toBe(cellColor(-dec, 1));
    });
    expect(a.querySelectorAll('.sample-marker')).toHaveLength(
      b.querySelectorAll('.sample-marker').length,
    );
  });

  it('marks queried and harvested samples differently and draws the crosshair', () => {
    const box = document.createElement('div');
    renderEstimate(box, raster([-1, -0.5, 0.5, 1], 2), domain);
    expect(box.querySelectorAll('.sample-marker.queried')).toHaveLength(1);
    expect(box.querySelectorAll('.sample-marker.trajectory')).toHaveLength(1);
    const cross = box.querySelector<HTMLElement>('.suggestion-crosshair');
    expect(cross).not.toBeNull();
    // (0, 0) sits at the domain center
    expect(cross!.style.left).toBe('50%');
    expect(cross!.style.top).toBe('50%');
  });

  it('positions markers in physical coordinates with v pointing up', () => {
    const box = document.createElement('div');
    renderEstimate(box, raster([-1, -0.5, 0.5, 1], 2), domain);
    const marker = box.querySelector<HTMLElement>('.sample-marker.trajectory')!;
    // state (3, 5): x -> (3+8)/16 = 68.75%, v -> top = 100% - 60% = 40%
    expect(marker.style.left).toBe('68.75%');
    expect(marker.style.top).toBe('40%');
  });
});

describe('renderPlaceholder', () => {
  it('replaces content with the message', () => {
    const box = document.createElement('div');
    box.innerHTML = '<span>old</span>';
    renderPlaceholder(box, 'estimate not ready');
    expect(box.textContent).toBe('estimate not ready');
    expect(box.querySelectorAll('.heatmap-cell')).toHaveLength(0);
  });
});

describe('cellColor', () => {
  it('uses the negative palette below zero and positive at/above', () => {
    expect(cellColor(-1, 1)).not.toBe(cellColor(1, 1));
    expect(cellColor(0.5, 1)).toBe(cellColor(0.5, 1));
  });
  it('handles an all-zero raster without dividing by zero', () => {
    expect(cellColor(0, 0)).toMatch(/^rgb\(/);
  });
});
