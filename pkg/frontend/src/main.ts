// Wires the session flow to the page. Server URL, dataset, and view come
// from query parameters (defaults target a local `viewclean serve`).

import { ApiClient } from "./api.js";
import { attachKeyboard, renderCards } from "./cards.js";
import { renderBanner, renderPanel, renderProgress } from "./panel.js";
import { SessionFlow } from "./state.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? "http://127.0.0.1:8642";
const dataset = params.get("dataset") ?? "synthetic";
const view = params.get("view") ?? "groups";
const attachId = params.get("session");

const flow = new SessionFlow(new ApiClient(server));

const panelEl = document.getElementById("panel")!;
const cardsEl = document.getElementById("cards")!;
const progressEl = document.getElementById("progress")!;
const bannerEl = document.getElementById("banner")!;
const submitBtn = document.getElementById("submit") as HTMLButtonElement;

let renderedViewVersion = -1;

flow.subscribe((state) => {
  renderCards(document, cardsEl, state, {
    choose: (pair, label) => flow.choose(pair, label),
  });
  renderProgress(document, progressEl, state);
  renderBanner(document, bannerEl, state);
  // the panel redraws exactly when a submit response arrived (or at load)
  if (state.viewVersion !== renderedViewVersion || renderedViewVersion < 0) {
    renderedViewVersion = state.viewVersion;
    renderPanel(document, panelEl, state);
  }
  submitBtn.disabled = !(state.phase === "labeling" && flow.allLabeled());
  submitBtn.textContent =
    state.phase === "submitting" ? "submitting…" : `submit ${state.batch.length} labels`;
});

submitBtn.addEventListener("click", () => void flow.submit());
bannerEl.addEventListener("click", (event) => {
  if ((event.target as HTMLElement).classList.contains("btn-retry")) {
    void flow.retry();
  }
});
attachKeyboard(document, cardsEl, () => flow.state(), {
  choose: (pair, label) => flow.choose(pair, label),
});

const boot = attachId
  ? flow.attach(attachId)
  : flow.start(dataset, view, {
      budget: Number(params.get("budget") ?? 100),
      batch: Number(params.get("batch") ?? 20),
      initial_batch: Number(params.get("initial_batch") ?? 13),
      strategy: params.get("strategy") ?? "view_impact",
      seed: Number(params.get("seed") ?? 0),
      holdout: false,
    });
boot.catch((err) => {
  bannerEl.textContent = `could not start session: ${err}`;
});
