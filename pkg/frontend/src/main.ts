/** DOM wiring for the planner console; all logic lives in the modules. */

import { ApiClient, ApiError, Evaluator } from "./api.js";
import { formatValue, objectiveCard } from "./card.js";
import { applyBrushes, checkKnee, METRICS, parallelLines, scatterPoints,
         tableRows, type Brush } from "./frontier.js";
import { choropleth, diffBlocks, USE_COLORS } from "./map.js";
import { defaultForm, exportPolicy, importPolicy, movePriority, renormalize,
         toRequestBody, validateForm, type PolicyForm } from "./policy.js";
import type { EvaluateResponse, RecordPayload, SiteResponse } from "./types.js";

const client = new ApiClient("");
const evaluator = new Evaluator(client, 200);

let form: PolicyForm | null = null;
let site: SiteResponse | null = null;
let lastResult: EvaluateResponse | null = null;
let previousResult: EvaluateResponse | null = null;
let mapMode: "use" | "far" = "use";

let runRecords: RecordPayload[] = [];
let frontIds = new Set<number>();
let kneeId: number | null = null;
let brushes: Brush[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function svgShapes(shapes: ReturnType<typeof choropleth>, width: number,
                   height: number, selected?: number): string {
  const body = shapes.map((s) =>
    `<path d="${s.path}" fill="${s.fill}" stroke="#333" stroke-width="1"` +
    `${s.id === selected ? ' class="selected"' : ""} data-id="${s.id}">` +
    `<title>${s.title}</title></path>`).join("");
  return `<svg viewBox="-5 -5 ${width + 10} ${height + 10}">${body}</svg>`;
}

function renderMap(): void {
  const target = el<HTMLDivElement>("map");
  const collection = lastResult?.allocation ?? site?.blocks;
  if (!collection || collection.features.length === 0) {
    target.innerHTML = "<p>no site loaded</p>";
    return;
  }
  const shapes = choropleth(collection, mapMode);
  target.innerHTML = svgShapes(shapes, 620, 620);
  const legend = Object.entries(USE_COLORS).map(([use, color]) =>
    `<span class="chip" style="background:${color}">${use}</span>`).join("");
  el<HTMLDivElement>("legend").innerHTML = mapMode === "use" ? legend : "";
}

function renderCard(): void {
  const target = el<HTMLDivElement>("card");
  if (!lastResult) {
    target.innerHTML = "<p>evaluate a policy to see its objectives</p>";
    return;
  }
  const rows = objectiveCard(lastResult.record.raw)
    .map((e) => `<tr><td>${e.label}</td><td data-key="${e.key}">` +
                `${formatValue(e.raw)}</td></tr>`)
    .join("");
  target.innerHTML = `<table><tbody>${rows}</tbody></table>`;
}

function renderDiff(): void {
  const target = el<HTMLDivElement>("diff");
  if (!previousResult || !lastResult) {
    target.innerHTML = "";
    return;
  }
  const changes = diffBlocks(previousResult.allocation, lastResult.allocation);
  if (changes.length === 0) {
    target.innerHTML = "<p>no blocks changed since the previous evaluation</p>";
    return;
  }
  target.innerHTML = "<ul>" + changes.map((c) =>
    `<li>block ${c.id}: ${c.from} → ${c.to}</li>`).join("") + "</ul>";
}

function renderFormControls(): void {
  if (!form) return;
  const tiers = el<HTMLDivElement>("tiers");
  tiers.innerHTML = form.tierNames.map((name, i) => `
    <fieldset><legend>${name}</legend>
      <label>radius <input type="number" data-role="radius" data-i="${i}"
        value="${form!.radii[i]}"></label>
      <label>sigma <input type="range" min="0" max="1" step="0.05"
        data-role="sigma" data-i="${i}" value="${form!.sigmas[i]}"></label>
      <label>rho <input type="number" min="0" max="1" step="0.05"
        data-role="rho" data-i="${i}" value="${form!.rhos[i]}"></label>
    </fieldset>`).join("");
  const priority = el<HTMLOListElement>("priority");
  priority.innerHTML = form.priority.map((use) =>
    `<li>${use} <button data-role="up" data-use="${use}">▲</button>` +
    `<button data-role="down" data-use="${use}">▼</button></li>`).join("");
  const shares = el<HTMLDivElement>("shares");
  shares.innerHTML = Object.keys(form.shares).sort().map((use) =>
    `<label>${use} <input type="number" min="0" max="1" step="0.001"
      data-role="share" data-use="${use}" value="${form!.shares[use]}"></label>`
  ).join("");
  el<HTMLInputElement>("b-total").value = String(form.bTotal);
}

async function evaluateCurrent(): Promise<void> {
  if (!form) return;
  const errors = validateForm(form);
  const status = el<HTMLDivElement>("status");
  if (errors.length) {
    status.textContent = errors.join("; ");
    return;
  }
  status.textContent = "evaluating…";
  try {
    const result = await evaluator.schedule(toRequestBody(form));
    previousResult = lastResult;
    lastResult = result;
    status.textContent = "";
    renderMap();
    renderCard();
    renderDiff();
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    status.textContent = err instanceof ApiError
      ? `infeasible policy: ${err.message}`
      : String(err);
  }
}

function renderFrontier(): void {
  const visible = applyBrushes(runRecords, brushes);
  const points = scatterPoints(runRecords, "one_minus_au", "jh_pen",
                               frontIds, kneeId)
    .filter((p) => visible.has(p.id));
  const size = 300;
  const dots = points.map((p) =>
    `<circle cx="${p.x * size}" cy="${(1 - p.y) * size}" ` +
    `r="${p.isKnee ? 7 : p.onFront ? 5 : 3}" ` +
    `class="${p.isKnee ? "knee" : p.onFront ? "front" : "dot"}" ` +
    `data-id="${p.id}"></circle>`).join("");
  el<HTMLDivElement>("scatter").innerHTML =
    `<svg viewBox="-10 -10 ${size + 20} ${size + 20}">${dots}</svg>`;

  const lines = parallelLines(runRecords).filter((l) => visible.has(l.id));
  const step = size / (METRICS.length - 1);
  const polylines = lines.map((l) => {
    const pts = l.values.map((v, i) => `${i * step},${(1 - v) * size}`).join(" ");
    const cls = l.id === kneeId ? "knee" : frontIds.has(l.id) ? "front" : "dot";
    return `<polyline points="${pts}" class="${cls}" data-id="${l.id}"></polyline>`;
  }).join("");
  el<HTMLDivElement>("parcoords").innerHTML =
    `<svg viewBox="-10 -10 ${size + 20} ${size + 20}">${polylines}</svg>`;

  const rows = tableRows(runRecords, visible, frontIds);
  el<HTMLDivElement>("records").innerHTML =
    "<table><thead><tr><th>id</th>" +
    METRICS.map((m) => `<th>${m}</th>`).join("") +
    "</tr></thead><tbody>" +
    rows.map((r) =>
      `<tr${r.onFront ? ' class="front"' : ""}><td>${r.id}</td>` +
      METRICS.map((m) => `<td>${formatValue(r.cells[m])}</td>`).join("") +
      "</tr>").join("") +
    "</tbody></table>";
}

async function loadRun(runId: string): Promise<void> {
  const [records, pareto] = await Promise.all([
    client.records(runId), client.pareto(runId)]);
  runRecords = records.records;
  frontIds = new Set(pareto.front.map((r) => r.id));
  kneeId = pareto.knee_id;
  if (!checkKnee(frontIds, kneeId)) {
    throw new Error("inconsistent run payload: knee is not on the frontier");
  }
  brushes = [];
  renderFrontier();
}

function wireEvents(): void {
  document.addEventListener("input", (event) => {
    const input = event.target as HTMLInputElement;
    if (!form || !input.dataset) return;
    const i = Number(input.dataset.i ?? -1);
    switch (input.dataset.role) {
      case "radius": form.radii[i] = Number(input.value); break;
      case "sigma": form.sigmas[i] = Number(input.value); break;
      case "rho": form.rhos[i] = Number(input.value); break;
      case "share":
        form.shares[input.dataset.use as string] = Number(input.value);
        break;
      default: return;
    }
    void evaluateCurrent();
  });
  document.addEventListener("click", (event) => {
    const button = event.target as HTMLElement;
    if (!form || !button.dataset) return;
    if (button.dataset.role === "up" || button.dataset.role === "down") {
      form.priority = movePriority(form.priority, button.dataset.use as string,
                                   button.dataset.role === "up" ? -1 : 1);
      renderFormControls();
      void evaluateCurrent();
    }
  });
  el<HTMLButtonElement>("evaluate").addEventListener("click", () => {
    void evaluateCurrent();
  });
  el<HTMLButtonElement>("normalize").addEventListener("click", () => {
    if (!form) return;
    form.shares = renormalize(form.shares);
    renderFormControls();
  });
  el<HTMLInputElement>("b-total").addEventListener("change", (ev) => {
    if (form) form.bTotal = Number((ev.target as HTMLInputElement).value);
  });
  el<HTMLButtonElement>("export").addEventListener("click", () => {
    if (!form) return;
    const blob = new Blob([exportPolicy(form)], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "policy.json";
    link.click();
  });
  el<HTMLInputElement>("import").addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    try {
      form = importPolicy(await file.text());
      renderFormControls();
      void evaluateCurrent();
    } catch (err) {
      el<HTMLDivElement>("status").textContent = String(err);
    }
  });
  el<HTMLSelectElement>("map-mode").addEventListener("change", (ev) => {
    mapMode = (ev.target as HTMLSelectElement).value as "use" | "far";
    renderMap();
  });
  el<HTMLSelectElement>("run-select").addEventListener("change", (ev) => {
    const runId = (ev.target as HTMLSelectElement).value;
    if (runId) void loadRun(runId);
  });
  el<HTMLInputElement>("brush-max").addEventListener("input", (ev) => {
    const max = Number((ev.target as HTMLInputElement).value);
    const key = el<HTMLSelectElement>("brush-key").value as Brush["key"];
    brushes = [{ key, min: 0, max }];
    renderFrontier();
  });
}

async function start(): Promise<void> {
  wireEvents();
  const evaluateButton = el<HTMLButtonElement>("evaluate");
  try {
    site = await client.site();
    form = defaultForm(site.tier_names, site.radii);
    evaluateButton.disabled = false;
    renderFormControls();
    renderMap();
    renderCard();
  } catch (err) {
    evaluateButton.disabled = true;
    el<HTMLDivElement>("status").textContent = err instanceof ApiError
      ? `no site loaded (${err.message})`
      : String(err);
  }
  try {
    const { runs } = await client.runs();
    el<HTMLSelectElement>("run-select").innerHTML =
      '<option value="">select a run</option>' +
      runs.map((r) => `<option value="${r}">${r}</option>`).join("");
  } catch {
    /* runs are optional */
  }
}

document.addEventListener("DOMContentLoaded", () => {
  void start();
});
