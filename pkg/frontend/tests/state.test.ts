import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { SessionFlow } from "../src/state.js";
import {
  FakeApi,
  makePair,
  submitResponse,
} from "./helpers.js";

const batchOf = (pairs: ReturnType<typeof makePair>[]) => ({
  stopped: false,
  reason: null,
  columns: ["name", "price"],
  pairs,
  labels_used: 0,
  budget: 40,
});

function twoPairFlow() {
  const pairs = [makePair(1, 2), makePair(3, 4)];
  const api = new FakeApi(
    [batchOf(pairs), batchOf([makePair(5, 6)])],
    [submitResponse()],
  );
  const flow = new SessionFlow(api);
  return { flow, api, pairs };
}

describe("session flow", () => {
  it("starts a session and exposes the first batch", async () => {
    const { flow } = twoPairFlow();
    await flow.start("synthetic", "groups", {});
    const state = flow.state();
    expect(state.phase).toBe("labeling");
    expect(state.batch).toHaveLength(2);
    expect(state.budget).toBe(40);
  });

  it("submit is gated on every card being labeled", async () => {
    const { flow, api } = twoPairFlow();
    await flow.start("synthetic", "groups", {});
    expect(flow.allLabeled()).toBe(false);
    await flow.submit(); // refused: nothing labeled
    expect(api.submissions).toHaveLength(0);
    flow.choose({ id1: 1, id2: 2 }, true);
    await flow.submit(); // refused: one card still unlabeled
    expect(api.submissions).toHaveLength(0);
    flow.choose({ id1: 3, id2: 4 }, false);
    expect(flow.allLabeled()).toBe(true);
    await flow.submit();
    expect(api.submissions).toHaveLength(1);
  });

  it("submits exactly the user's choices", async () => {
    const { flow, api } = twoPairFlow();
    await flow.start("synthetic", "groups", {});
    flow.choose({ id1: 1, id2: 2 }, true);
    flow.choose({ id1: 3, id2: 4 }, false);
    flow.choose({ id1: 3, id2: 4 }, true); // user changed their mind
    await flow.submit();
    expect(api.submissions[0]).toEqual([
      { id1: 1, id2: 2, label: true },
      { id1: 3, id2: 4, label: true },
    ]);
  });

  it("ignores choices for pairs outside the batch", async () => {
    const { flow } = twoPairFlow();
    await flow.start("synthetic", "groups", {});
    flow.choose({ id1: 99, id2: 100 }, true);
    expect(flow.state().choices.size).toBe(0);
  });

  it("never double-submits while a submit is in flight", async () => {
    const { flow, api } = twoPairFlow();
    await flow.start("synthetic", "groups", {});
    flow.choose({ id1: 1, id2: 2 }, true);
    flow.choose({ id1: 3, id2: 4 }, false);
    const first = flow.submit();
    const second = flow.submit(); // phase is "submitting": refused
    await Promise.all([first, second]);
    expect(api.submissions).toHaveLength(1);
  });

  it("updates the panel data exactly on submit responses", async () => {
    const { flow } = twoPairFlow();
    await flow.start("synthetic", "groups", {});
    const before = flow.state().viewVersion;
    flow.choose({ id1: 1, id2: 2 }, true);
    expect(flow.state().viewVersion).toBe(before);
    flow.choose({ id1: 3, id2: 4 }, false);
    await flow.submit();
    const state = flow.state();
    expect(state.viewVersion).toBe(before + 1);
    expect(state.views.groups.rows).toEqual([["a", 2]]);
    expect(state.lastChange).toBe(0.1);
  });

  it("keeps choices and allows resubmit after a network failure", async () => {
    const { flow, api, pairs } = twoPairFlow();
    api.batches = [batchOf(pairs), batchOf(pairs), batchOf([makePair(5, 6)])];
    await flow.start("synthetic", "groups", {});
    flow.choose({ id1: 1, id2: 2 }, true);
    flow.choose({ id1: 3, id2: 4 }, false);
    api.failNextSubmit = new Error("network down");
    await flow.submit();
    expect(flow.state().phase).toBe("retryable");
    expect(api.submissions).toHaveLength(0);
    await flow.retry(); // re-fetches the same outstanding batch
    expect(flow.state().phase).toBe("labeling");
    expect(flow.state().choices.size).toBe(2);
    await flow.submit();
    expect(api.submissions).toHaveLength(1);
  });

  it("catches up without re-posting when a lost submit actually landed", async () => {
    const { flow, api, pairs } = twoPairFlow();
    const nextBatch = batchOf([makePair(7, 8)]);
    api.batches = [batchOf(pairs), nextBatch];
    await flow.start("synthetic", "groups", {});
    flow.choose({ id1: 1, id2: 2 }, true);
    flow.choose({ id1: 3, id2: 4 }, false);
    // the server applied the labels but the response was lost: the retry
    // path sees a different outstanding batch and must not re-post
    api.failNextSubmit = new ApiError(409, "labels must cover exactly the outstanding batch");
    await flow.submit();
    const state = flow.state();
    expect(api.submissions).toHaveLength(0);
    expect(state.phase).toBe("labeling");
    expect(state.batch.map((p) => p.id1)).toEqual([7]);
    expect(state.choices.size).toBe(0);
  });

  it("moves to stopped when the server says so", async () => {
    const { flow, api } = twoPairFlow();
    api.submitResponses = [
      submitResponse({ stopped: true, reason: "converged" }),
    ];
    await flow.start("synthetic", "groups", {});
    flow.choose({ id1: 1, id2: 2 }, true);
    flow.choose({ id1: 3, id2: 4 }, false);
    await flow.submit();
    const state = flow.state();
    expect(state.phase).toBe("stopped");
    expect(state.stopReason).toBe("converged");
    expect(state.batch).toHaveLength(0);
    await flow.submit(); // terminal: refused
    expect(api.submissions).toHaveLength(1);
  });
});
