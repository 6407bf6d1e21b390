// Pair cards: the two records side by side, attribute by attribute, with
// an impact badge and the chosen label. Keyboard-first: y / n label the
// focused card, arrows move focus.

import type { FlowState } from "./state.js";
import type { PairPayload } from "./types.js";
import { pairId } from "./types.js";

export interface CardCallbacks {
  choose(pair: PairPayload, label: boolean): void;
}

function cardElement(
  doc: Document,
  pair: PairPayload,
  columns: string[],
  choice: boolean | undefined,
  cb: CardCallbacks,
): HTMLElement {
  const card = doc.createElement("article");
  card.className = "pair-card";
  card.dataset.pair = pairId(pair);
  card.tabIndex = 0;
  if (choice !== undefined) {
    card.classList.add(choice ? "chosen-dup" : "chosen-not");
  }

  const head = doc.createElement("header");
  const ids = doc.createElement("span");
  ids.textContent = `#${pair.id1} vs #${pair.id2}`;
  const badge = doc.createElement("span");
  badge.className = "impact-badge";
  badge.textContent = `impact ${pair.impact.toFixed(4)}`;
  head.append(ids, badge);

  const table = doc.createElement("table");
  table.className = "pair-attrs";
  const cols = columns.length ? columns : Object.keys(pair.records[0]);
  for (const col of cols) {
    const row = doc.createElement("tr");
    const name = doc.createElement("th");
    name.textContent = col;
    const a = doc.createElement("td");
    const b = doc.createElement("td");
    const va = pair.records[0][col];
    const vb = pair.records[1][col];
    a.textContent = va === null ? "∅" : String(va);
    b.textContent = vb === null ? "∅" : String(vb);
    if (String(va) !== String(vb)) {
      a.classList.add("differs");
      b.classList.add("differs");
    }
    row.append(name, a, b);
    table.append(row);
  }

  const buttons = doc.createElement("div");
  buttons.className = "card-buttons";
  const yes = doc.createElement("button");
  yes.textContent = "duplicate (y)";
  yes.className = "btn-dup" + (choice === true ? " active" : "");
  yes.addEventListener("click", () => cb.choose(pair, true));
  const no = doc.createElement("button");
  no.textContent = "not duplicate (n)";
  no.className = "btn-not" + (choice === false ? " active" : "");
  no.addEventListener("click", () => cb.choose(pair, false));
  buttons.append(yes, no);

  card.append(head, table, buttons);
  return card;
}

export function renderCards(
  doc: Document,
  container: HTMLElement,
  state: FlowState,
  cb: CardCallbacks,
): void {
  container.replaceChildren();
  for (const pair of state.batch) {
    container.append(
      cardElement(doc, pair, state.columns, state.choices.get(pairId(pair)), cb),
    );
  }
}

/** y/n label the focused card and advance; arrow keys move focus. */
export function attachKeyboard(
  doc: Document,
  container: HTMLElement,
  stateOf: () => FlowState,
  cb: CardCallbacks,
): void {
  doc.addEventListener("keydown", (event) => {
    const state = stateOf();
    if (state.phase !== "labeling" && state.phase !== "retryable") return;
    const cards = Array.from(container.querySelectorAll<HTMLElement>(".pair-card"));
    if (!cards.length) return;
    const focused = doc.activeElement as HTMLElement | null;
    let index = cards.findIndex((c) => c === focused);
    if (event.key === "ArrowDown" || event.key === "ArrowRight") {
      index = Math.min(cards.length - 1, index + 1);
      cards[index].focus();
      event.preventDefault();
      return;
    }
    if (event.key === "ArrowUp" || event.key === "ArrowLeft") {
      index = Math.max(0, index - 1);
      cards[index].focus();
      event.preventDefault();
      return;
    }
    if (event.key !== "y" && event.key !== "n") return;
    if (index < 0) index = 0;
    const key = cards[index].dataset.pair;
    const pair = state.batch.find((p) => pairId(p) === key);
    if (!pair) return;
    cb.choose(pair, event.key === "y");
    const next = Math.min(cards.length - 1, index + 1);
    cards[next]?.focus();
    event.preventDefault();
  });
}
