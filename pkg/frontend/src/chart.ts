// View rendering data: a plain grouped bar chart with value labels, a big
// number for single-cell aggregates, and a sparkline for the distance
// history. The data derivation is pure so it can be checked against the
// server's view payload directly.

import type { CellValue, ViewPayload } from "./types.js";

export interface BarDatum {
  label: string;
  value: number;
}

export type PanelData =
  | { kind: "number"; value: number; label: string }
  | { kind: "bars"; bars: BarDatum[]; max: number }
  | { kind: "table"; rows: number };

const MAX_BARS = 40;

function fmtCell(v: CellValue): string {
  if (v === null) return "∅";
  if (typeof v === "number") return Number.isInteger(v) ? String(v) : v.toFixed(2);
  return v;
}

export function panelData(view: ViewPayload): PanelData {
  const numeric = view.schema
    .map(([, t], i) => (t === "number" ? i : -1))
    .filter((i) => i >= 0);
  const text = view.schema
    .map(([, t], i) => (t === "text" ? i : -1))
    .filter((i) => i >= 0);
  if (view.rows.length === 1 && numeric.length === 1 && text.length === 0) {
    const cell = view.rows[0][numeric[0]];
    return {
      kind: "number",
      value: typeof cell === "number" ? cell : 0,
      label: view.schema[numeric[0]][0],
    };
  }
  if (numeric.length >= 1 && view.rows.length <= MAX_BARS) {
    const valueIdx = numeric[numeric.length - 1];
    const bars = view.rows.map((row, i) => ({
      label: text.length
        ? text.map((t) => fmtCell(row[t])).join(" · ")
        : `row ${i + 1}`,
      value: typeof row[valueIdx] === "number" ? (row[valueIdx] as number) : 0,
    }));
    return { kind: "bars", bars, max: Math.max(0, ...bars.map((b) => b.value)) };
  }
  return { kind: "table", rows: view.rows.length };
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderBars(doc: Document, data: BarDatum[], max: number): SVGSVGElement {
  const barH = 22;
  const gap = 6;
  const labelW = 170;
  const chartW = 320;
  const height = data.length * (barH + gap) + gap;
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "bar-chart");
  svg.setAttribute("viewBox", `0 0 ${labelW + chartW + 60} ${height}`);
  svg.setAttribute("width", "100%");
  data.forEach((d, i) => {
    const y = gap + i * (barH + gap);
    const w = max > 0 ? (d.value / max) * chartW : 0;
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(labelW - 8));
    label.setAttribute("y", String(y + barH * 0.7));
    label.setAttribute("text-anchor", "end");
    label.setAttribute("class", "bar-label");
    label.textContent = d.label;
    const bar = doc.createElementNS(SVG_NS, "rect");
    bar.setAttribute("x", String(labelW));
    bar.setAttribute("y", String(y));
    bar.setAttribute("width", String(Math.max(w, 1)));
    bar.setAttribute("height", String(barH));
    bar.setAttribute("class", "bar");
    const value = doc.createElementNS(SVG_NS, "text");
    value.setAttribute("x", String(labelW + Math.max(w, 1) + 6));
    value.setAttribute("y", String(y + barH * 0.7));
    value.setAttribute("class", "bar-value");
    value.textContent = fmtCell(d.value);
    svg.append(label, bar, value);
  });
  return svg;
}

export function renderSparkline(doc: Document, history: number[]): SVGSVGElement {
  const w = 160;
  const h = 36;
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "sparkline");
  svg.setAttribute("viewBox", `0 0 ${w} ${h}`);
  if (history.length > 0) {
    const peak = Math.max(...history, 1e-9);
    const step = history.length > 1 ? w / (history.length - 1) : 0;
    const points = history
      .map((v, i) => `${(i * step).toFixed(1)},${(h - 4 - (v / peak) * (h - 8)).toFixed(1)}`)
      .join(" ");
    const line = doc.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", points);
    line.setAttribute("class", "spark-line");
    line.setAttribute("fill", "none");
    svg.append(line);
  }
  return svg;
}
