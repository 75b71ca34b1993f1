/** Pure SVG chart math: scales, ticks, and path strings. No DOM here. */

export type Scale = (x: number) => number;

export function scaleLinear(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  if (span === 0) {
    return () => (r0 + r1) / 2;
  }
  return (x: number) => r0 + ((x - d0) / span) * (r1 - r0);
}

/** Round-valued axis ticks covering [min, max] with roughly n steps. */
export function niceTicks(min: number, max: number, n = 5): number[] {
  if (!(max > min)) {
    return [min];
  }
  const rawStep = (max - min) / Math.max(n, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => c >= rawStep) ?? candidates[candidates.length - 1]!;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let t = start; t <= max + step * 1e-9; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

/** Polyline path ("M x y L x y ...") for one series under the given scales. */
export function linePath(ys: number[], sx: Scale, sy: Scale): string {
  if (ys.length === 0) {
    return "";
  }
  const parts: string[] = [];
  ys.forEach((y, i) => {
    const cmd = i === 0 ? "M" : "L";
    parts.push(`${cmd}${round2(sx(i))},${round2(sy(y))}`);
  });
  return parts.join(" ");
}

export function seriesExtent(series: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const v of s) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === Infinity) {
    return [0, 1];
  }
  if (lo === hi) {
    return [lo - 0.5, hi + 0.5];
  }
  return [lo, hi];
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}

/** Compact human form for kg magnitudes (axis labels). */
export function formatKg(kg: number): string {
  const abs = Math.abs(kg);
  if (abs >= 1e9) return `${(kg / 1e9).toFixed(1)} Mt`;
  if (abs >= 1e6) return `${(kg / 1e6).toFixed(1)} kt`;
  if (abs >= 1e3) return `${(kg / 1e3).toFixed(1)} t`;
  return `${kg.toFixed(0)} kg`;
}
