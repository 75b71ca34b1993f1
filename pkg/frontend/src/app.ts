/** Dashboard wiring: scenario builder, run launcher, and trace views.
 *
 * Two run slots are compared: A (baseline) and B (intervention). All data
 * shown comes from the service; this module only reshapes and draws it.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  districtSummaries,
  intensityColor,
  monthOfWeek,
  monthTicks,
  stateTotal,
} from "./aggregate.js";
import { formatKg, linePath, niceTicks, scaleLinear, seriesExtent } from "./chart.js";
import {
  BuilderState,
  buildScenario,
  defaultBuilder,
  parseYieldSeed,
  validateScenario,
} from "./spec.js";
import type { DistrictInfo, ScenarioDoc, TraceResponse } from "./types.js";

interface RunSlot {
  label: "A" | "B";
  runId: string;
  cached: boolean;
  doc: ScenarioDoc;
  pct: TraceResponse;
  storage: TraceResponse;
}

interface AppState {
  districts: DistrictInfo[];
  truth: { month: string; kg: number }[];
  builder: BuilderState;
  runA: RunSlot | null;
  runB: RunSlot | null;
  busy: boolean;
  error: string;
}

const api = new ApiClient("");
const state: AppState = {
  districts: [],
  truth: [],
  builder: defaultBuilder(),
  runA: null,
  runB: null,
  busy: false,
  error: "",
};

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

async function boot(): Promise<void> {
  try {
    const [districts, truth] = await Promise.all([api.districts(), api.storageTruth()]);
    state.districts = districts.districts;
    state.truth = truth.series;
    $("fingerprint").textContent = `dataset ${districts.dataset_fingerprint.slice(0, 12)}`;
  } catch (err) {
    state.error = String(err);
  }
  renderBuilder();
  renderAll();
}

// ---------------------------------------------------------------- builder --

function renderBuilder(): void {
  const b = state.builder;
  const floodOptions = state.districts
    .map(
      (d) =>
        `<option value="${d.id}" ${b.flood.districtIds.includes(d.id) ? "selected" : ""}>` +
        `${d.id} ${d.name}</option>`,
    )
    .join("");
  $("builder").innerHTML = `
    <label>Scenario name <input id="f-name" value="${b.name}"></label>
    <label>Horizon (weeks) <input id="f-horizon" type="number" min="1" max="260" value="${b.horizonWeeks}"></label>
    <fieldset><legend>Prices (per kg)</legend>
      <label>MSP <span id="f-msp-val">${b.prices.msp.toFixed(2)}</span>
        <input id="f-msp" type="range" min="10" max="30" step="0.05" value="${b.prices.msp}">
      </label>
      <label>MSP last year <input id="f-msp-last" type="number" step="0.05" value="${b.prices.msp_last_year}"></label>
      <label>Market price <input id="f-market" type="number" step="0.05" value="${b.prices.market_price}"></label>
      <label>Market last year <input id="f-market-last" type="number" step="0.05" value="${b.prices.market_price_last_year}"></label>
    </fieldset>
    <fieldset><legend><label><input id="f-flood-on" type="checkbox" ${b.flood.enabled ? "checked" : ""}> Flood event</label></legend>
      <label>Week <input id="f-flood-week" type="number" min="0" value="${b.flood.week}"></label>
      <label>Destroyed <span id="f-flood-frac-val">${Math.round(b.flood.destroyedFraction * 100)}%</span>
        <input id="f-flood-frac" type="range" min="0" max="1" step="0.05" value="${b.flood.destroyedFraction}">
      </label>
      <label>Districts <select id="f-flood-districts" multiple size="6">${floodOptions}</select></label>
    </fieldset>
    <fieldset><legend><label><input id="f-mspchange-on" type="checkbox" ${b.mspChange.enabled ? "checked" : ""}> MSP change</label></legend>
      <label>Effective week <input id="f-mspchange-week" type="number" min="0" value="${b.mspChange.week}"></label>
      <label>New MSP <input id="f-mspchange-msp" type="number" step="0.05" value="${b.mspChange.newMsp}"></label>
    </fieldset>
    <fieldset><legend>Yield seed</legend>
      <label>Upload (JSON or CSV id,kg) <input id="f-yield" type="file" accept=".json,.csv,.txt"></label>
      <span id="f-yield-info">${b.yieldSeedKg ? `${Object.keys(b.yieldSeedKg).length} districts loaded` : "none"}</span>
      <button id="f-yield-clear" type="button" ${b.yieldSeedKg ? "" : "disabled"}>clear</button>
    </fieldset>
    <div id="issues" class="issues"></div>
    <div class="actions">
      <button id="run-a" type="button">Run as baseline (A)</button>
      <button id="run-b" type="button">Run as intervention (B)</button>
    </div>
  `;
  wireBuilder();
  renderIssues();
}

function readBuilder(): void {
  const b = state.builder;
  b.name = ($("f-name") as HTMLInputElement).value || "what-if";
  b.horizonWeeks = Number(($("f-horizon") as HTMLInputElement).value);
  b.prices.msp = Number(($("f-msp") as HTMLInputElement).value);
  b.prices.msp_last_year = Number(($("f-msp-last") as HTMLInputElement).value);
  b.prices.market_price = Number(($("f-market") as HTMLInputElement).value);
  b.prices.market_price_last_year = Number(($("f-market-last") as HTMLInputElement).value);
  b.flood.enabled = ($("f-flood-on") as HTMLInputElement).checked;
  b.flood.week = Number(($("f-flood-week") as HTMLInputElement).value);
  b.flood.destroyedFraction = Number(($("f-flood-frac") as HTMLInputElement).value);
  b.flood.districtIds = [...($("f-flood-districts") as HTMLSelectElement).selectedOptions].map(
    (o) => Number(o.value),
  );
  b.mspChange.enabled = ($("f-mspchange-on") as HTMLInputElement).checked;
  b.mspChange.week = Number(($("f-mspchange-week") as HTMLInputElement).value);
  b.mspChange.newMsp = Number(($("f-mspchange-msp") as HTMLInputElement).value);
}

function wireBuilder(): void {
  for (const id of [
    "f-name", "f-horizon", "f-msp", "f-msp-last", "f-market", "f-market-last",
    "f-flood-on", "f-flood-week", "f-flood-frac", "f-flood-districts",
    "f-mspchange-on", "f-mspchange-week", "f-mspchange-msp",
  ]) {
    $(id).addEventListener("input", () => {
      readBuilder();
      $("f-msp-val").textContent = state.builder.prices.msp.toFixed(2);
      $("f-flood-frac-val").textContent =
        `${Math.round(state.builder.flood.destroyedFraction * 100)}%`;
      renderIssues();
    });
  }
  $("f-yield").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      state.builder.yieldSeedKg = parseYieldSeed(await file.text());
      $("f-yield-info").textContent =
        `${Object.keys(state.builder.yieldSeedKg).length} districts loaded`;
      ($("f-yield-clear") as HTMLButtonElement).disabled = false;
    } catch (err) {
      state.builder.yieldSeedKg = null;
      $("f-yield-info").textContent = String(err);
    }
    renderIssues();
  });
  $("f-yield-clear").addEventListener("click", () => {
    state.builder.yieldSeedKg = null;
    $("f-yield-info").textContent = "none";
    ($("f-yield-clear") as HTMLButtonElement).disabled = true;
    renderIssues();
  });
  $("run-a").addEventListener("click", () => void launch("A"));
  $("run-b").addEventListener("click", () => void launch("B"));
}

function currentIssues() {
  const doc = buildScenario(state.builder);
  return validateScenario(doc, new Set(state.districts.map((d) => d.id)));
}

function renderIssues(): void {
  const issues = currentIssues();
  $("issues").innerHTML = issues
    .map((i) => `<div class="issue s${i.status}">${i.field}: ${i.message}</div>`)
    .join("");
  const disabled = issues.length > 0 || state.busy;
  ($("run-a") as HTMLButtonElement).disabled = disabled;
  ($("run-b") as HTMLButtonElement).disabled = disabled;
}

// ------------------------------------------------------------------- runs --

async function launch(label: "A" | "B"): Promise<void> {
  if (currentIssues().length > 0) return;
  const doc = buildScenario(state.builder);
  state.busy = true;
  state.error = "";
  renderIssues();
  try {
    const submitted = await api.submitRun(doc);
    const [pct, storage] = await Promise.all([
      api.trace(submitted.run_id, { metric: "pct_undernourished" }),
      api.trace(submitted.run_id, { metric: "procured_storage" }),
    ]);
    const slot: RunSlot = {
      label,
      runId: submitted.run_id,
      cached: submitted.cached,
      doc,
      pct,
      storage,
    };
    if (label === "A") state.runA = slot;
    else state.runB = slot;
  } catch (err) {
    state.error = err instanceof ApiError ? `${err.status}: ${err.detail}` : String(err);
  } finally {
    state.busy = false;
    renderIssues();
    renderAll();
  }
}

// ------------------------------------------------------------------ views --

const W = 840;
const H = 300;
const PAD = { l: 56, r: 12, t: 12, b: 26 };

function floodedIds(doc: ScenarioDoc): Set<number> {
  const out = new Set<number>();
  for (const ev of doc.events) {
    if (ev.type === "flood") {
      for (const d of ev.district_ids) out.add(d);
    }
  }
  return out;
}

function renderAll(): void {
  $("status").textContent = state.error
    ? `error — ${state.error}`
    : state.busy
      ? "running…"
      : "";
  renderRunBadges();
  renderPctChart();
  renderStorageChart();
  renderTable();
}

function renderRunBadges(): void {
  const badge = (s: RunSlot | null, label: "A" | "B") =>
    s
      ? `<span class="badge">${s.label}: ${s.doc.name} <code>${s.runId}</code>` +
        `${s.cached ? ' <em class="cached">cached</em>' : ""}</span>`
      : `<span class="badge empty">${label}: not run</span>`;
  $("run-info").innerHTML = badge(state.runA, "A") + badge(state.runB, "B");
}

function renderPctChart(): void {
  const focus = state.runB ?? state.runA;
  const host = $("chart-pct");
  if (!focus) {
    host.innerHTML = '<p class="hint">Run a scenario to see the 75 district curves.</p>';
    return;
  }
  const series = focus.pct.series["pct_undernourished"] ?? {};
  const all = Object.values(series);
  const backdrop = state.runB && state.runA ? state.runA : null;
  const backdropSeries = backdrop
    ? Object.values(backdrop.pct.series["pct_undernourished"] ?? {})
    : [];
  const [lo, hi] = seriesExtent(all.concat(backdropSeries));
  const sx = scaleLinear([0, Math.max(focus.pct.horizon_weeks - 1, 1)], [PAD.l, W - PAD.r]);
  const sy = scaleLinear([Math.min(lo, 0), hi * 1.05], [H - PAD.b, PAD.t]);
  const flooded = floodedIds(focus.doc);
  const paths: string[] = [];
  for (const s of backdropSeries) {
    paths.push(`<path class="ghost" d="${linePath(s, sx, sy)}"/>`);
  }
  for (const [id, s] of Object.entries(series)) {
    const cls = flooded.has(Number(id)) ? "district flooded" : "district";
    paths.push(`<path class="${cls}" d="${linePath(s, sx, sy)}"/>`);
  }
  const yTicks = niceTicks(Math.min(lo, 0), hi * 1.05, 5)
    .map(
      (t) =>
        `<g><line x1="${PAD.l}" x2="${W - PAD.r}" y1="${sy(t)}" y2="${sy(t)}" class="grid"/>` +
        `<text x="${PAD.l - 6}" y="${sy(t)}" class="ylab">${t}</text></g>`,
    )
    .join("");
  const xTicks = monthTicks(focus.pct.anchor_date, focus.pct.horizon_weeks)
    .filter((_, i) => i % 2 === 0)
    .map(
      (t) =>
        `<text x="${sx(t.week)}" y="${H - 8}" class="xlab">${t.label.slice(2)}</text>`,
    )
    .join("");
  host.innerHTML =
    `<svg viewBox="0 0 ${W} ${H}">` + yTicks + xTicks + paths.join("") + `</svg>` +
    `<p class="hint">${Object.keys(series).length} districts — ` +
    `${flooded.size ? `${flooded.size} flooded highlighted` : "no flood event"}` +
    `${backdrop ? "; baseline A ghosted" : ""}</p>`;
}

function renderStorageChart(): void {
  const host = $("chart-storage");
  const slots = [state.runA, state.runB].filter((s): s is RunSlot => s !== null);
  if (slots.length === 0) {
    host.innerHTML = '<p class="hint">State-level procured storage vs ground truth appears here.</p>';
    return;
  }
  const totals = slots.map((s) => ({
    slot: s,
    series: stateTotal(s.storage.series["procured_storage"] ?? {}, s.storage.horizon_weeks),
  }));
  const first = slots[0]!;
  const horizon = first.storage.horizon_weeks;
  // ground-truth months that the run actually covers
  const monthsInRun = new Set<string>();
  for (let w = 0; w < horizon; w++) {
    monthsInRun.add(monthOfWeek(first.storage.anchor_date, w));
  }
  const truth = state.truth.filter((p) => monthsInRun.has(p.month));
  const truthByMonth = new Map(truth.map((p) => [p.month, p.kg]));
  const truthPts: { week: number; kg: number }[] = [];
  let seen = "";
  for (let w = 0; w < horizon; w++) {
    const m = monthOfWeek(first.storage.anchor_date, w);
    if (m !== seen && truthByMonth.has(m)) {
      truthPts.push({ week: w, kg: truthByMonth.get(m)! });
      seen = m;
    }
  }
  const [, hi] = seriesExtent(totals.map((t) => t.series).concat([truthPts.map((p) => p.kg)]));
  const sx = scaleLinear([0, Math.max(horizon - 1, 1)], [PAD.l, W - PAD.r]);
  const sy = scaleLinear([0, hi * 1.05], [H - PAD.b, PAD.t]);
  const lines = totals
    .map(
      (t) =>
        `<path class="state ${t.slot.label === "A" ? "runA" : "runB"}" d="${linePath(t.series, sx, sy)}"/>`,
    )
    .join("");
  const dots = truthPts
    .map((p) => `<circle cx="${sx(p.week)}" cy="${sy(p.kg)}" r="3.5" class="truth"/>`)
    .join("");
  const yTicks = niceTicks(0, hi * 1.05, 5)
    .map(
      (t) =>
        `<g><line x1="${PAD.l}" x2="${W - PAD.r}" y1="${sy(t)}" y2="${sy(t)}" class="grid"/>` +
        `<text x="${PAD.l - 6}" y="${sy(t)}" class="ylab">${formatKg(t)}</text></g>`,
    )
    .join("");
  const xTicks = monthTicks(first.storage.anchor_date, horizon)
    .filter((_, i) => i % 2 === 0)
    .map((t) => `<text x="${sx(t.week)}" y="${H - 8}" class="xlab">${t.label.slice(2)}</text>`)
    .join("");
  host.innerHTML =
    `<svg viewBox="0 0 ${W} ${H}">` + yTicks + xTicks + lines + dots + `</svg>` +
    `<p class="hint">solid: state procured storage (A gray, B green); dots: monthly ground truth (${truthPts.length} points)</p>`;
}

function renderTable(): void {
  const focus = state.runB ?? state.runA;
  const host = $("district-table");
  if (!focus) {
    host.innerHTML = "";
    return;
  }
  const names = new Map(state.districts.map((d) => [d.id, d.name]));
  const rows = districtSummaries(focus.pct);
  const maxPeak = rows.reduce((a, r) => Math.max(a, r.peak), 0);
  const body = rows
    .map(
      (r) =>
        `<tr><td>${r.id}</td><td>${names.get(r.id) ?? ""}</td>` +
        `<td>${r.baseline.toFixed(2)}</td>` +
        `<td style="background:${intensityColor(r.peak, maxPeak)}">${r.peak.toFixed(2)}</td>` +
        `<td>${r.excess.toFixed(2)}</td></tr>`,
    )
    .join("");
  host.innerHTML =
    `<table><thead><tr><th>id</th><th>district</th><th>baseline %</th>` +
    `<th>peak %</th><th>excess pp</th></tr></thead><tbody>${body}</tbody></table>`;
}

boot();
