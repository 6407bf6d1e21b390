// The view panel: current view as a bar chart or single big number, the
// last view change, and the distance-history sparkline. Re-rendered
// exactly when a submit response arrives (tracked by viewVersion).

import { panelData, renderBars, renderSparkline } from "./chart.js";
import type { FlowState } from "./state.js";

export function renderPanel(doc: Document, container: HTMLElement, state: FlowState): void {
  container.replaceChildren();
  for (const [name, view] of Object.entries(state.views)) {
    const section = doc.createElement("section");
    section.className = "view-panel";
    section.dataset.view = name;

    const title = doc.createElement("h2");
    title.textContent = name;
    section.append(title);

    const data = panelData(view);
    if (data.kind === "number") {
      const big = doc.createElement("div");
      big.className = "big-number";
      big.textContent = Number.isInteger(data.value)
        ? String(data.value)
        : data.value.toFixed(2);
      const caption = doc.createElement("div");
      caption.className = "big-number-label";
      caption.textContent = data.label;
      section.append(big, caption);
    } else if (data.kind === "bars") {
      section.append(renderBars(doc, data.bars, data.max));
    } else {
      const note = doc.createElement("p");
      note.textContent = `${data.rows} rows`;
      section.append(note);
    }
    container.append(section);
  }

  const meta = doc.createElement("div");
  meta.className = "panel-meta";
  const change = doc.createElement("span");
  change.className = "view-change";
  change.textContent =
    state.lastChange === null
      ? "view change: –"
      : `view change: ${state.lastChange.toFixed(4)}`;
  meta.append(change, renderSparkline(doc, state.history));
  container.append(meta);
}

export function renderProgress(doc: Document, container: HTMLElement, state: FlowState): void {
  container.replaceChildren();
  const text = doc.createElement("span");
  text.textContent = `${state.labelsUsed} / ${state.budget} labels`;
  const track = doc.createElement("div");
  track.className = "progress-track";
  const fill = doc.createElement("div");
  fill.className = "progress-fill";
  const frac = state.budget > 0 ? state.labelsUsed / state.budget : 0;
  fill.style.width = `${Math.min(100, 100 * frac).toFixed(1)}%`;
  track.append(fill);
  container.append(text, track);
}

export function renderBanner(doc: Document, container: HTMLElement, state: FlowState): void {
  container.replaceChildren();
  if (state.phase === "stopped") {
    const banner = doc.createElement("div");
    banner.className = "stop-banner";
    banner.textContent =
      state.stopReason === "converged"
        ? "view converged, cleaning stopped"
        : `cleaning stopped: ${state.stopReason ?? "done"}`;
    container.append(banner);
  } else if (state.phase === "retryable" && state.error) {
    const banner = doc.createElement("div");
    banner.className = "error-banner";
    banner.textContent = `request failed (${state.error}): `;
    const retry = doc.createElement("button");
    retry.textContent = "retry";
    retry.className = "btn-retry";
    banner.append(retry);
    container.append(banner);
  }
}
