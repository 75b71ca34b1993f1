/** Scenario construction and client-side validation.
 *
 * The checks mirror the service's rejection causes: shape/range problems it
 * answers with 400, unknown district references with 422. Catching them
 * here keeps bad submissions out of the network entirely.
 */

import type { EventDoc, Prices, ScenarioDoc } from "./types.js";

export interface ValidationIssue {
  field: string;
  message: string;
  status: 400 | 422;
}

export interface FloodForm {
  enabled: boolean;
  week: number;
  districtIds: number[];
  destroyedFraction: number;
}

export interface MspChangeForm {
  enabled: boolean;
  week: number;
  newMsp: number;
}

export interface BuilderState {
  name: string;
  horizonWeeks: number;
  anchorDate: string;
  prices: Prices;
  flood: FloodForm;
  mspChange: MspChangeForm;
  yieldSeedKg: Record<string, number> | null;
  yieldSeedTotalOverrideKg: number | null;
}

export function defaultBuilder(): BuilderState {
  return {
    name: "what-if",
    horizonWeeks: 52,
    anchorDate: "2019-04-01",
    prices: {
      msp: 18.4,
      msp_last_year: 17.35,
      market_price: 20.1,
      market_price_last_year: 19.2,
    },
    flood: { enabled: false, week: 22, districtIds: [], destroyedFraction: 0.75 },
    mspChange: { enabled: false, week: 10, newMsp: 20.0 },
    yieldSeedKg: null,
    yieldSeedTotalOverrideKg: null,
  };
}

export function buildScenario(state: BuilderState, baseParams: Record<string, unknown> = {}): ScenarioDoc {
  const events: EventDoc[] = [];
  if (state.yieldSeedKg !== null) {
    events.push({
      type: "yield_seed",
      yields_kg: state.yieldSeedKg,
      state_total_override_kg: state.yieldSeedTotalOverrideKg,
    });
  }
  if (state.flood.enabled) {
    events.push({
      type: "flood",
      week: state.flood.week,
      district_ids: [...state.flood.districtIds].sort((a, b) => a - b),
      destroyed_fraction: state.flood.destroyedFraction,
    });
  }
  if (state.mspChange.enabled) {
    events.push({
      type: "msp_change",
      effective_week: state.mspChange.week,
      new_msp: state.mspChange.newMsp,
    });
  }
  return {
    name: state.name,
    horizon_weeks: state.horizonWeeks,
    anchor_date: state.anchorDate,
    prices: { ...state.prices },
    events,
    params: { ...baseParams },
  };
}

export function validateScenario(doc: ScenarioDoc, knownIds: Set<number>): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  const bad = (field: string, message: string, status: 400 | 422 = 400) =>
    issues.push({ field, message, status });

  if (!Number.isInteger(doc.horizon_weeks) || doc.horizon_weeks < 0) {
    bad("horizon_weeks", "horizon must be a non-negative integer");
  }
  const prices = doc.prices ?? ({} as Prices);
  for (const key of ["msp", "msp_last_year", "market_price", "market_price_last_year"] as const) {
    const v = prices[key];
    if (typeof v !== "number" || !Number.isFinite(v) || v <= 0) {
      bad(`prices.${key}`, "price must be a positive number");
    }
  }
  if (doc.anchor_date !== undefined && !/^\d{4}-\d{2}-\d{2}$/.test(doc.anchor_date)) {
    bad("anchor_date", "expected YYYY-MM-DD");
  }

  doc.events.forEach((ev, i) => {
    const at = `events[${i}]`;
    if (ev.type === "flood") {
      if (ev.district_ids.length === 0) {
        bad(`${at}.district_ids`, "flood needs at least one district");
      }
      if (!(ev.destroyed_fraction >= 0 && ev.destroyed_fraction <= 1)) {
        bad(`${at}.destroyed_fraction`, "fraction must lie in [0, 1]");
      }
      if (!Number.isInteger(ev.week) || ev.week < 0 || ev.week >= Math.max(doc.horizon_weeks, 1)) {
        bad(`${at}.week`, "event week outside horizon");
      }
      const unknown = ev.district_ids.filter((d) => !knownIds.has(d));
      if (unknown.length > 0) {
        bad(`${at}.district_ids`, `unknown district ids ${unknown.join(", ")}`, 422);
      }
    } else if (ev.type === "msp_change") {
      if (!(ev.new_msp > 0)) {
        bad(`${at}.new_msp`, "new MSP must be > 0");
      }
      if (!Number.isInteger(ev.effective_week) || ev.effective_week < 0 || ev.effective_week >= Math.max(doc.horizon_weeks, 1)) {
        bad(`${at}.effective_week`, "event week outside horizon");
      }
    } else if (ev.type === "yield_seed") {
      const entries = Object.entries(ev.yields_kg ?? {});
      if (entries.length === 0) {
        bad(`${at}.yields_kg`, "yield seed needs at least one district");
      }
      for (const [id, kg] of entries) {
        if (!(kg >= 0)) {
          bad(`${at}.yields_kg.${id}`, "seeded yield must be >= 0");
        }
        if (!knownIds.has(Number(id))) {
          bad(`${at}.yields_kg.${id}`, `unknown district id ${id}`, 422);
        }
      }
    } else {
      bad(at, `unknown event type ${(ev as { type: string }).type}`);
    }
  });
  return issues;
}

/** Parse an uploaded yield-seed file: JSON {"id": kg} or CSV id,produced_kg. */
export function parseYieldSeed(text: string): Record<string, number> {
  const trimmed = text.trim();
  if (trimmed.startsWith("{")) {
    const obj = JSON.parse(trimmed) as Record<string, unknown>;
    const out: Record<string, number> = {};
    for (const [k, v] of Object.entries(obj)) {
      const kg = Number(v);
      if (!Number.isFinite(kg)) {
        throw new Error(`yield for district ${k} is not a number`);
      }
      out[String(Number(k))] = kg;
    }
    return out;
  }
  const out: Record<string, number> = {};
  const lines = trimmed.split(/\r?\n/).filter((ln) => ln.trim() !== "");
  const start = lines[0]?.toLowerCase().startsWith("id") ? 1 : 0;
  for (const ln of lines.slice(start)) {
    const [id, kg] = ln.split(",");
    const idNum = Number(id);
    const kgNum = Number(kg);
    if (!Number.isInteger(idNum) || !Number.isFinite(kgNum)) {
      throw new Error(`bad yield row: ${ln}`);
    }
    out[String(idNum)] = kgNum;
  }
  if (Object.keys(out).length === 0) {
    throw new Error("yield file has no rows");
  }
  return out;
}

/** Stable JSON used to detect resubmission of an identical scenario. */
export function canonicalScenario(doc: ScenarioDoc): string {
  const sortValue = (v: unknown): unknown => {
    if (Array.isArray(v)) return v.map(sortValue);
    if (v !== null && typeof v === "object") {
      const entries = Object.entries(v as Record<string, unknown>).sort(([a], [b]) =>
        a < b ? -1 : a > b ? 1 : 0,
      );
      return Object.fromEntries(entries.map(([k, val]) => [k, sortValue(val)]));
    }
    return v;
  };
  return JSON.stringify(sortValue(doc));
}
