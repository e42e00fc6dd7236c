// Results dashboard: ward selection (checklist + clickable map), demographic
// heatmap with a quantized gray legend, and one strip plot per selected ward.
// Cell values are rendered verbatim from the server payload; the client never
// recomputes counts or percentages.

import type { ApiClient, MatrixPayload, StripsPayload } from "../api.js";
import { ApiError } from "../api.js";
import { formatDollars } from "../money.js";
import type { ViewState } from "../state.js";

export const AXES = ["race", "age", "income", "education"];

export interface WardGeometry {
  ward: number;
  ring: [number, number][];
}

export function parseWardsGeo(geo: unknown): WardGeometry[] {
  const fc = geo as { features: { properties: { ward: number }; geometry: { coordinates: number[][][] } }[] };
  return fc.features.map((f) => ({
    ward: f.properties.ward,
    ring: f.geometry.coordinates[0] as [number, number][],
  }));
}

function grayFor(value: number | null, bins: number[]): string {
  if (value === null) return "transparent";
  let idx = 0;
  for (let i = 1; i < bins.length; i++) {
    if (value <= bins[i]) {
      idx = i - 1;
      break;
    }
    idx = bins.length - 2;
  }
  const levels = bins.length - 1;
  const shade = Math.round(235 - (idx * 160) / Math.max(1, levels - 1));
  return `rgb(${shade}, ${shade}, ${shade})`;
}

function formatCell(value: number | null, mode: string): string {
  if (value === null) return "–";
  if (mode === "percent") return `${value.toFixed(1)}%`;
  return value.toLocaleString("en-US");
}

export function renderHeatmap(doc: Document, matrix: MatrixPayload): HTMLElement {
  const table = doc.createElement("table");
  table.className = "heatmap";
  table.dataset.mode = matrix.mode;
  const head = doc.createElement("tr");
  head.appendChild(doc.createElement("th"));
  for (const col of matrix.columns) {
    const th = doc.createElement("th");
    th.textContent = `Ward ${col.ward} ${col.source}`;
    head.appendChild(th);
  }
  table.appendChild(head);
  matrix.rows.forEach((row, i) => {
    const tr = doc.createElement("tr");
    const th = doc.createElement("th");
    th.textContent = row;
    tr.appendChild(th);
    matrix.columns.forEach((_, j) => {
      const td = doc.createElement("td");
      const value = matrix.cells[i][j];
      td.dataset.value = value === null ? "" : String(value);
      td.textContent = formatCell(value, matrix.mode);
      td.style.backgroundColor = grayFor(value, matrix.bins);
      tr.appendChild(td);
    });
    table.appendChild(tr);
  });
  return table;
}

export function renderLegend(doc: Document, matrix: MatrixPayload): HTMLElement {
  const legend = doc.createElement("div");
  legend.className = "legend";
  for (let i = 0; i + 1 < matrix.bins.length; i++) {
    const swatch = doc.createElement("span");
    swatch.className = "legend-bin";
    swatch.style.backgroundColor = grayFor((matrix.bins[i] + matrix.bins[i + 1]) / 2, matrix.bins);
    swatch.title = `${matrix.bins[i].toFixed(1)} – ${matrix.bins[i + 1].toFixed(1)}`;
    legend.appendChild(swatch);
  }
  return legend;
}

export function renderStrips(doc: Document, strips: StripsPayload, categories: string[]): HTMLElement {
  const svgNS = "http://www.w3.org/2000/svg";
  const width = 520;
  const rowHeight = 34;
  const left = 180;
  const svg = doc.createElementNS(svgNS, "svg") as SVGSVGElement;
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(rowHeight * categories.length + 20));
  svg.setAttribute("data-ward", String(strips.ward));
  categories.forEach((category, i) => {
    const label = doc.createElementNS(svgNS, "text");
    label.setAttribute("x", "4");
    label.setAttribute("y", String(i * rowHeight + 22));
    label.textContent = category;
    svg.appendChild(label);
  });
  for (const point of strips.points) {
    const i = categories.indexOf(point.category);
    if (i < 0) continue;
    const mark = doc.createElementNS(svgNS, "circle");
    const x = left + (point.dollars / strips.budget_total) * (width - left - 12);
    const jitter = (point.voter % 9) - 4;
    mark.setAttribute("cx", String(Math.round(x)));
    mark.setAttribute("cy", String(i * rowHeight + 16 + jitter));
    mark.setAttribute("r", "3");
    mark.setAttribute("class", "strip-mark");
    const title = doc.createElementNS(svgNS, "title");
    title.textContent = `${formatDollars(point.dollars)} from voter ${point.voter}`;
    mark.appendChild(title);
    svg.appendChild(mark);
  }
  return svg as unknown as HTMLElement;
}

export function renderWardMap(
  doc: Document,
  geometries: WardGeometry[],
  selected: number[],
  onToggle: (ward: number) => void,
): HTMLElement {
  const svgNS = "http://www.w3.org/2000/svg";
  const svg = doc.createElementNS(svgNS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", "-0.1 -0.1 2.2 2.2");
  svg.setAttribute("width", "180");
  svg.setAttribute("height", "180");
  svg.setAttribute("data-role", "ward-map");
  for (const geometry of geometries) {
    const poly = doc.createElementNS(svgNS, "polygon");
    poly.setAttribute("points", geometry.ring.map(([x, y]) => `${x},${y}`).join(" "));
    poly.setAttribute(
      "class",
      selected.includes(geometry.ward) ? "ward-shape selected" : "ward-shape",
    );
    poly.setAttribute("data-ward", String(geometry.ward));
    poly.addEventListener("click", () => onToggle(geometry.ward));
    svg.appendChild(poly);
  }
  return svg as unknown as HTMLElement;
}

export interface DashboardDeps {
  api: ApiClient;
  state: ViewState;
  categories: string[];
  geometries: WardGeometry[];
  rerender: () => void;
}

export async function refreshMatrix(deps: DashboardDeps): Promise<void> {
  const { api, state } = deps;
  state.matrix = await api.demographicsMatrix(
    state.dashboard.wards,
    state.dashboard.axis,
    state.dashboard.mode,
  );
}

export async function renderDashboard(
  doc: Document,
  container: HTMLElement,
  deps: DashboardDeps,
): Promise<void> {
  const { api, state } = deps;
  container.innerHTML = "";

  const heading = doc.createElement("h2");
  heading.textContent = "Who is voting, and how are they allocating?";
  container.appendChild(heading);

  const controls = doc.createElement("div");
  controls.className = "dashboard-controls";

  controls.appendChild(
    renderWardMap(doc, deps.geometries, state.dashboard.wards, (ward) => {
      const wards = state.dashboard.wards;
      state.dashboard.wards = wards.includes(ward)
        ? wards.filter((w) => w !== ward)
        : [...wards, ward].sort((a, b) => a - b);
      deps.rerender();
    }),
  );

  const checklist = doc.createElement("div");
  checklist.className = "ward-checklist";
  for (const geometry of deps.geometries) {
    const label = doc.createElement("label");
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.value = String(geometry.ward);
    box.checked = state.dashboard.wards.includes(geometry.ward);
    box.addEventListener("change", () => {
      const wards = state.dashboard.wards.filter((w) => w !== geometry.ward);
      state.dashboard.wards = box.checked
        ? [...wards, geometry.ward].sort((a, b) => a - b)
        : wards;
      deps.rerender();
    });
    label.appendChild(box);
    label.append(` Ward ${geometry.ward}`);
    checklist.appendChild(label);
  }
  controls.appendChild(checklist);

  const axisSelect = doc.createElement("select");
  axisSelect.dataset.role = "axis";
  for (const axis of AXES) {
    const opt = doc.createElement("option");
    opt.value = axis;
    opt.textContent = axis;
    opt.selected = axis === state.dashboard.axis;
    axisSelect.appendChild(opt);
  }
  axisSelect.addEventListener("change", () => {
    state.dashboard.axis = axisSelect.value;
    deps.rerender();
  });
  controls.appendChild(axisSelect);

  const toggle = doc.createElement("button");
  toggle.type = "button";
  toggle.dataset.role = "mode-toggle";
  toggle.textContent = state.dashboard.mode === "counts" ? "Show percentages" : "Show counts";
  toggle.addEventListener("click", () => {
    state.dashboard.mode = state.dashboard.mode === "counts" ? "percent" : "counts";
    deps.rerender();
  });
  controls.appendChild(toggle);
  container.appendChild(controls);

  try {
    await refreshMatrix(deps);
  } catch (err) {
    state.matrix = null;
    const empty = doc.createElement("div");
    empty.className = "empty-state";
    empty.dataset.role = "empty-state";
    empty.textContent =
      err instanceof ApiError && err.code === "insufficient-data"
        ? "Not enough voting data yet to compare against the census. Check back once votes are finalized."
        : `Could not load demographics (${err instanceof ApiError ? err.code : "error"}).`;
    container.appendChild(empty);
  }
  if (state.matrix) {
    container.appendChild(renderHeatmap(doc, state.matrix));
    container.appendChild(renderLegend(doc, state.matrix));
  }

  for (const ward of state.dashboard.wards) {
    const section = doc.createElement("section");
    section.className = "strip-section";
    const h = doc.createElement("h3");
    h.textContent = `Ward ${ward}: dollars per voter by category`;
    section.appendChild(h);
    try {
      const strips = await api.strips(ward);
      section.appendChild(renderStrips(doc, strips, deps.categories));
    } catch (err) {
      const empty = doc.createElement("div");
      empty.className = "empty-state";
      empty.dataset.role = "empty-state";
      empty.textContent =
        err instanceof ApiError && err.code === "no-votes"
          ? `No finalized votes in ward ${ward} yet.`
          : "Could not load allocations.";
      section.appendChild(empty);
    }
    container.appendChild(section);
  }
}
