import type { SessionApi } from "../src/api.js";
import type {
  BatchPayload,
  LabelChoice,
  PairPayload,
  SessionDescriptor,
  SubmitResponse,
  ViewPayload,
  ViewsResponse,
} from "../src/types.js";

export function makePair(id1: number, id2: number, impact = 0.1): PairPayload {
  return {
    id1,
    id2,
    impact,
    records: [
      { name: `rec ${id1}`, price: id1 },
      { name: `rec ${id2}`, price: id2 },
    ],
  };
}

export function makeView(rows: [string, number][]): ViewPayload {
  return {
    schema: [
      ["category", "text"],
      ["count", "number"],
    ],
    rows: rows.map(([c, n]) => [c, n]),
  };
}

export function descriptor(over: Partial<SessionDescriptor> = {}): SessionDescriptor {
  return {
    id: "s1",
    dataset: "synthetic",
    views: ["groups"],
    created_at: "now",
    labels_used: 0,
    budget: 40,
    budget_left: 40,
    batches_done: 0,
    batch_size: 2,
    last_view_change: null,
    history: [],
    stopped: false,
    reason: null,
    digest: "d0",
    ...over,
  };
}

/** Scriptable in-memory server double for the session flow. */
export class FakeApi implements SessionApi {
  batches: BatchPayload[];
  submissions: LabelChoice[][] = [];
  submitResponses: SubmitResponse[];
  failNextSubmit: Error | null = null;
  batchCalls = 0;
  viewsPayload: ViewsResponse;

  constructor(batches: BatchPayload[], submitResponses: SubmitResponse[]) {
    this.batches = batches;
    this.submitResponses = submitResponses;
    this.viewsPayload = {
      views: { groups: makeView([["a", 3]]) },
      history: [],
      stopped: false,
      reason: null,
    };
  }

  async createSession(): Promise<SessionDescriptor> {
    return descriptor();
  }

  async descriptor(): Promise<SessionDescriptor> {
    return descriptor({ labels_used: this.submissions.flat().length });
  }

  async batch(): Promise<BatchPayload> {
    this.batchCalls += 1;
    return this.batches[Math.min(this.batchCalls - 1, this.batches.length - 1)];
  }

  async submitLabels(_id: string, labels: LabelChoice[]): Promise<SubmitResponse> {
    if (this.failNextSubmit) {
      const err = this.failNextSubmit;
      this.failNextSubmit = null;
      throw err;
    }
    this.submissions.push(labels);
    return this.submitResponses[
      Math.min(this.submissions.length - 1, this.submitResponses.length - 1)
    ];
  }

  async views(): Promise<ViewsResponse> {
    return this.viewsPayload;
  }
}

export function submitResponse(
  over: Partial<SubmitResponse> = {},
): SubmitResponse {
  return {
    state: descriptor({ labels_used: 2, history: [0.1] }),
    views: { groups: makeView([["a", 2]]) },
    view_change: 0.1,
    stopped: false,
    reason: null,
    ...over,
  };
}
