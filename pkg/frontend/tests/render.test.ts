import { describe, expect, it } from 'vitest';

import { densityBars, extent, polylinePath, scaleLinear } from '../src/render';

describe('scaleLinear', () => {
  it('maps the domain endpoints onto the range endpoints', () => {
    const s = scaleLinear([0, 10], [0, 100]);
    expect(s(0)).toBe(0);
    expect(s(10)).toBe(100);
    expect(s(5)).toBe(50);
  });

  it('supports inverted ranges for y axes', () => {
    const s = scaleLinear([0, 1], [200, 0]);
    expect(s(0)).toBe(200);
    expect(s(1)).toBe(0);
  });

  it('degenerate domain does not divide by zero', () => {
    const s = scaleLinear([3, 3], [0, 100]);
    expect(Number.isFinite(s(3))).toBe(true);
  });
});

describe('extent', () => {
  it('finds min and max', () => {
    expect(extent([3, -1, 7, 2])).toEqual([-1, 7]);
  });

  it('falls back to [0, 1] on empty input', () => {
    expect(extent([])).toEqual([0, 1]);
  });
});

describe('polylinePath', () => {
  it('emits one M followed by L segments', () => {
    const x = scaleLinear([0, 2], [0, 100]);
    const y = scaleLinear([0, 1], [100, 0]);
    const d = polylinePath([0, 1, 2], [0, 0.5, 1], x, y);
    expect(d).toBe('M0.00,100.00L50.00,50.00L100.00,0.00');
  });

  it('rejects mismatched inputs', () => {
    const s = scaleLinear([0, 1], [0, 1]);
    expect(() => polylinePath([0, 1], [0], s, s)).toThrow('mismatch');
  });
});

describe('densityBars', () => {
  it('bar heights are proportional to mass', () => {
    const x = scaleLinear([0, 4], [0, 100]);
    const y = scaleLinear([0, 0.5], [100, 0]);
    const bars = densityBars([0, 2, 4], [0.5, 0.25, 0], x, y);
    expect(bars.map((b) => b.height)).toEqual([100, 50, 0]);
    expect(bars.map((b) => b.x)).toEqual([0, 50, 100]);
  });
});
