/** Wire types of the simulation service; the dashboard renders these only. */

export interface DistrictInfo {
  id: number;
  name: string;
  total_population: number;
  rural_population: number;
  urban_population: number;
  avg_family_size: number;
  aay_households: number;
  priority_persons: number;
  baseline_pct_undernourished: number;
}

export interface DistrictsResponse {
  districts: DistrictInfo[];
  dataset_fingerprint: string;
}

export interface Prices {
  msp: number;
  msp_last_year: number;
  market_price: number;
  market_price_last_year: number;
}

export interface FloodEventDoc {
  type: "flood";
  week: number;
  district_ids: number[];
  destroyed_fraction: number;
  include_farm_storage?: boolean;
}

export interface MspChangeEventDoc {
  type: "msp_change";
  effective_week: number;
  new_msp: number;
}

export interface YieldSeedEventDoc {
  type: "yield_seed";
  yields_kg: Record<string, number>;
  state_total_override_kg?: number | null;
}

export type EventDoc = FloodEventDoc | MspChangeEventDoc | YieldSeedEventDoc;

export interface ScenarioDoc {
  name: string;
  horizon_weeks: number;
  anchor_date?: string;
  prices: Prices;
  events: EventDoc[];
  params: Record<string, unknown>;
}

export interface RunSubmitResponse {
  run_id: string;
  cached: boolean;
}

export interface TraceResponse {
  run_id: string;
  scenario: string;
  horizon_weeks: number;
  anchor_date: string;
  weeks: number[];
  baseline_pct: Record<string, number>;
  series: Record<string, Record<string, number[]>>;
}

export interface StorageTruthResponse {
  series: { month: string; kg: number }[];
}

export interface RunsListResponse {
  runs: { run_id: string; scenario: string }[];
}
