/** Pure scaling / SVG-path helpers shared by both views.  No DOM access. */

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function scaleLinear(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return values.length ? [lo, hi] : [0, 1];
}

/** SVG path for a polyline through (xs[i], ys[i]) under the given scales. */
export function polylinePath(xs: number[], ys: number[], x: Scale, y: Scale): string {
  if (xs.length !== ys.length) throw new Error('x/y length mismatch');
  return xs
    .map((xi, i) => `${i === 0 ? 'M' : 'L'}${x(xi).toFixed(2)},${y(ys[i]).toFixed(2)}`)
    .join('');
}

/** Bar x-positions/heights for the density overlay, one bar per anchor. */
export function densityBars(
  anchors: number[],
  mass: number[],
  x: Scale,
  y: Scale,
): { x: number; height: number }[] {
  return anchors.map((a, i) => ({ x: x(a), height: y.range[0] - y(mass[i]) }));
}
