// DOM wiring for the loading-pattern explorer. All physics/ML numbers on
// screen come from the service; this file only routes clicks and renders
// responses.

import { ApiClient, ServiceError } from "./api.js";
import { DEFAULT_LAYOUT, makeScale, pathFor, type Series } from "./chart.js";
import { debounce } from "./debounce.js";
import { GRID, isFuel, N_TYPES, slotAt, validateLayout } from "./geometry.js";
import {
  applyPredict,
  applySimulate,
  beginPredict,
  beginSimulate,
  initialState,
  patternString,
  predictFailed,
  selectType,
  setSlot,
  simulateFailed,
  slotFromMessage,
  type EditorState,
} from "./state.js";
import type { AssemblyInfo } from "./types.js";

const TYPE_COLORS = [
  "#e7e7e7", // unused (0)
  "#8dd3c7", "#fdb462", "#bebada", "#fb8072", "#80b1d3",
  "#b3de69", "#fccde5", "#bc80bd", "#ffed6f",
];

const DEBOUNCE_MS = 150;
const baseUrl =
  new URLSearchParams(window.location.search).get("service") ??
  "http://127.0.0.1:8421";
const api = new ApiClient(baseUrl);

validateLayout();

let state: EditorState = initialState();
let assemblies: AssemblyInfo[] = [];

const el = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
};

function renderBanner(): void {
  const banner = el("banner");
  banner.textContent = state.banner ?? "";
  banner.style.display = state.banner ? "block" : "none";
}

function renderGrid(): void {
  const grid = el("core-grid");
  grid.replaceChildren();
  for (let r = 0; r < GRID; r++) {
    for (let c = 0; c < GRID; c++) {
      const cell = document.createElement("div");
      const slot = slotAt(r, c);
      if (slot >= 0) {
        const type = state.octant[slot];
        cell.className = "cell fuel";
        cell.style.background = TYPE_COLORS[type];
        cell.title = `slot ${slot}, FA${type}`;
        if (state.invalidSlot === slot) cell.classList.add("invalid");
        if (r + c === 0 || slotInOctantWedge(r, c)) cell.classList.add("wedge");
        cell.addEventListener("click", () => onCellClick(slot));
        cell.textContent = String(type);
      } else {
        cell.className = isFuel(r, c) ? "cell fuel" : "cell outside";
      }
      grid.appendChild(cell);
    }
  }
}

function slotInOctantWedge(r: number, c: number): boolean {
  return r >= 8 && c >= r; // the editable representative wedge
}

function renderPalette(): void {
  const palette = el("palette");
  palette.replaceChildren();
  for (let t = 1; t <= N_TYPES; t++) {
    const info = assemblies.find((a) => a.id === t);
    const button = document.createElement("button");
    button.className = "swatch" + (state.selectedType === t ? " selected" : "");
    button.style.background = TYPE_COLORS[t];
    const label = info
      ? `${info.name} ${info.enrichment_wt_pct}% / ${info.ba_rods} BA`
      : `FA${t}`;
    button.textContent = label;
    button.addEventListener("click", () => {
      state = selectType(state, t);
      renderPalette();
    });
    palette.appendChild(button);
  }
}

function renderReadouts(): void {
  const p = state.prediction;
  el("cycle-readout").textContent = p
    ? `${p.cycle_length_efpd.toFixed(4)} EFPD`
    : "—";
  el("rhomax-readout").textContent = p ? p.rho_max.toFixed(5) : "—";
  el("pattern-readout").textContent = patternString(state);
  const sim = state.simulation;
  el("sim-readout").textContent = sim
    ? sim.censored
      ? "simulator: censored (never goes subcritical)"
      : `simulator: ${sim.cycle_length_efpd?.toFixed(4)} EFPD`
    : "";
  el("spinner").style.visibility =
    state.pendingPredict || state.pendingSimulate ? "visible" : "hidden";
}

function renderChart(): void {
  const svg = el("chart");
  svg.replaceChildren();
  const seriesList: Array<{ s: Series; cls: string }> = [];
  if (state.prediction) {
    seriesList.push({
      s: {
        x: state.prediction.trajectory.map((t) => t.time_efpd),
        y: state.prediction.trajectory.map((t) => t.rho),
      },
      cls: "predicted",
    });
  }
  if (state.simulation) {
    seriesList.push({
      s: { x: state.simulation.times, y: state.simulation.rho },
      cls: "simulated",
    });
  }
  if (!seriesList.length) return;
  const scale = makeScale(seriesList.map((e) => e.s));
  const ns = "http://www.w3.org/2000/svg";

  for (const tick of scale.yTicks) {
    const line = document.createElementNS(ns, "line");
    line.setAttribute("x1", String(DEFAULT_LAYOUT.margin.left));
    line.setAttribute("x2", String(DEFAULT_LAYOUT.width - DEFAULT_LAYOUT.margin.right));
    line.setAttribute("y1", String(tick.pos));
    line.setAttribute("y2", String(tick.pos));
    line.setAttribute("class", tick.value === 0 ? "grid zero" : "grid");
    svg.appendChild(line);
    const label = document.createElementNS(ns, "text");
    label.setAttribute("x", String(DEFAULT_LAYOUT.margin.left - 6));
    label.setAttribute("y", String(tick.pos + 4));
    label.setAttribute("class", "tick y");
    label.textContent = tick.value.toFixed(3);
    svg.appendChild(label);
  }
  for (const tick of scale.xTicks) {
    const label = document.createElementNS(ns, "text");
    label.setAttribute("x", String(tick.pos));
    label.setAttribute(
      "y",
      String(DEFAULT_LAYOUT.height - DEFAULT_LAYOUT.margin.bottom + 18),
    );
    label.setAttribute("class", "tick x");
    label.textContent = String(tick.value);
    svg.appendChild(label);
  }
  for (const { s, cls } of seriesList) {
    const path = document.createElementNS(ns, "path");
    path.setAttribute("d", pathFor(s, scale));
    path.setAttribute("class", `curve ${cls}`);
    svg.appendChild(path);
  }
  el("legend").style.display = "flex";
  el("legend-sim").style.display = state.simulation ? "inline-flex" : "none";
}

function renderAll(): void {
  renderBanner();
  renderGrid();
  renderReadouts();
  renderChart();
}

const requestPredict = debounce(() => {
  const [next, seq] = beginPredict(state);
  state = next;
  renderReadouts();
  api
    .predict(state.octant)
    .then((resp) => {
      state = applyPredict(state, seq, resp);
      renderAll();
    })
    .catch((err: unknown) => {
      const message =
        err instanceof ServiceError ? err.message : "service unreachable";
      const slot =
        err instanceof ServiceError && err.status === 422
          ? slotFromMessage(err.message)
          : null;
      state = predictFailed(state, seq, message, slot);
      renderAll();
    });
}, DEBOUNCE_MS);

function onCellClick(slot: number): void {
  const before = state.octant;
  state = setSlot(state, slot);
  if (state.octant !== before) {
    renderAll();
    requestPredict();
  }
}

function onCompare(): void {
  const [next, seq] = beginSimulate(state);
  state = next;
  renderReadouts();
  api
    .simulate(state.octant)
    .then((resp) => {
      state = applySimulate(state, seq, resp);
      renderAll();
    })
    .catch((err: unknown) => {
      const message =
        err instanceof ServiceError ? err.message : "service unreachable";
      state = simulateFailed(state, seq, message);
      renderAll();
    });
}

function onExport(): void {
  void navigator.clipboard?.writeText(patternString(state));
}

async function boot(): Promise<void> {
  el("compare").addEventListener("click", onCompare);
  el("export").addEventListener("click", onExport);
  renderAll();
  try {
    const [table, model] = await Promise.all([api.assemblies(), api.model()]);
    assemblies = table.assemblies;
    const meta = model.metadata as { run_name?: string };
    el("model-readout").textContent =
      `${model.layer_dims.join("-")}  δ=${model.dropout}` +
      (meta.run_name ? `  (${meta.run_name})` : "");
    renderPalette();
    requestPredict();
    requestPredict.flush();
  } catch {
    state = { ...state, banner: `service unreachable at ${baseUrl}` };
    renderAll();
    renderPalette();
  }
}

void boot();
