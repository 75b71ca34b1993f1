/** Presentation-side reshaping of trace responses (sums, peaks, months).
 * No simulation logic: everything derives from served series. */

import type { TraceResponse } from "./types.js";

/** Sum one metric across all districts, week by week. */
export function stateTotal(byDistrict: Record<string, number[]>, horizon: number): number[] {
  const total = new Array<number>(horizon).fill(0);
  for (const series of Object.values(byDistrict)) {
    series.forEach((v, w) => {
      total[w] = (total[w] ?? 0) + v;
    });
  }
  return total;
}

export function peak(series: number[]): number {
  return series.reduce((a, b) => Math.max(a, b), -Infinity);
}

export interface DistrictSummary {
  id: number;
  baseline: number;
  peak: number;
  excess: number;
}

/** Baseline vs peak undernourishment per district, sorted by excess. */
export function districtSummaries(trace: TraceResponse): DistrictSummary[] {
  const series = trace.series["pct_undernourished"] ?? {};
  const out: DistrictSummary[] = [];
  for (const [id, values] of Object.entries(series)) {
    const baseline = trace.baseline_pct[id] ?? 0;
    const p = peak(values);
    out.push({ id: Number(id), baseline, peak: p, excess: p - baseline });
  }
  out.sort((a, b) => b.excess - a.excess || a.id - b.id);
  return out;
}

export interface MonthTick {
  week: number;
  label: string;
}

/** First week of each calendar month along the horizon, for x-axis labels. */
export function monthTicks(anchorIso: string, horizon: number): MonthTick[] {
  const anchor = new Date(`${anchorIso}T00:00:00Z`);
  const ticks: MonthTick[] = [];
  let last = "";
  for (let w = 0; w < horizon; w++) {
    const d = new Date(anchor.getTime() + w * 7 * 86400_000);
    const label = `${d.getUTCFullYear()}-${String(d.getUTCMonth() + 1).padStart(2, "0")}`;
    if (label !== last) {
      ticks.push({ week: w, label });
      last = label;
    }
  }
  return ticks;
}

/** Month key of a given week, mirroring the server's trace month mapping. */
export function monthOfWeek(anchorIso: string, week: number): string {
  const anchor = new Date(`${anchorIso}T00:00:00Z`);
  const d = new Date(anchor.getTime() + week * 7 * 86400_000);
  return `${d.getUTCFullYear()}-${String(d.getUTCMonth() + 1).padStart(2, "0")}`;
}

/** White-to-red intensity for the district table (choropleth stand-in). */
export function intensityColor(value: number, max: number): string {
  if (!(max > 0)) {
    return "rgba(200, 30, 30, 0)";
  }
  const t = Math.max(0, Math.min(1, value / max));
  return `rgba(200, 30, 30, ${(t * 0.85).toFixed(3)})`;
}
