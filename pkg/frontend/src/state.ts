// The labeling session flow: one state machine, no DOM.
//
// Invariants it guards: the submitted label set is exactly the user's card
// choices (never fabricated, never partial), at most one request is in
// flight, and a failed submit recovers by idempotently re-fetching the
// outstanding batch, so a submit is never sent twice for the same batch.

import { ApiError, type SessionApi } from "./api.js";
import type {
  PairPayload,
  SessionConfig,
  SessionDescriptor,
  ViewPayload,
} from "./types.js";
import { pairId } from "./types.js";

export type Phase =
  | "idle"
  | "loading"
  | "labeling"
  | "submitting"
  | "retryable"
  | "stopped";

export interface FlowState {
  phase: Phase;
  sessionId: string | null;
  batch: PairPayload[];
  columns: string[];
  choices: ReadonlyMap<string, boolean>;
  labelsUsed: number;
  budget: number;
  batchSize: number;
  views: Record<string, ViewPayload>;
  history: number[];
  lastChange: number | null;
  stopReason: string | null;
  error: string | null;
  viewVersion: number; // bumps exactly when a submit response lands
}

type Listener = (state: FlowState) => void;

export class SessionFlow {
  private phase: Phase = "idle";
  private sessionId: string | null = null;
  private batch: PairPayload[] = [];
  private columns: string[] = [];
  private choices = new Map<string, boolean>();
  private labelsUsed = 0;
  private budget = 0;
  private batchSize = 0;
  private views: Record<string, ViewPayload> = {};
  private history: number[] = [];
  private lastChange: number | null = null;
  private stopReason: string | null = null;
  private error: string | null = null;
  private viewVersion = 0;
  private listeners: Listener[] = [];

  constructor(private readonly api: SessionApi) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  state(): FlowState {
    return {
      phase: this.phase,
      sessionId: this.sessionId,
      batch: [...this.batch],
      columns: [...this.columns],
      choices: new Map(this.choices),
      labelsUsed: this.labelsUsed,
      budget: this.budget,
      batchSize: this.batchSize,
      views: this.views,
      history: [...this.history],
      lastChange: this.lastChange,
      stopReason: this.stopReason,
      error: this.error,
      viewVersion: this.viewVersion,
    };
  }

  private emit(): void {
    const snapshot = this.state();
    for (const listener of this.listeners) listener(snapshot);
  }

  async start(dataset: string, view: string, config: SessionConfig): Promise<void> {
    this.phase = "loading";
    this.emit();
    const desc = await this.api.createSession({ dataset, view, config });
    this.adoptDescriptor(desc);
    const views = await this.api.views(desc.id);
    this.views = views.views;
    this.history = views.history;
    await this.pullBatch();
  }

  async attach(sessionId: string): Promise<void> {
    this.phase = "loading";
    this.emit();
    const desc = await this.api.descriptor(sessionId);
    this.adoptDescriptor(desc);
    const views = await this.api.views(sessionId);
    this.views = views.views;
    this.history = views.history;
    await this.pullBatch();
  }

  private adoptDescriptor(desc: SessionDescriptor): void {
    this.sessionId = desc.id;
    this.labelsUsed = desc.labels_used;
    this.budget = desc.budget;
    this.batchSize = desc.batch_size;
    this.lastChange = desc.last_view_change;
    this.history = desc.history;
    if (desc.stopped) {
      this.phase = "stopped";
      this.stopReason = desc.reason;
    }
  }

  private async pullBatch(): Promise<void> {
    if (!this.sessionId) throw new Error("no session");
    const batch = await this.api.batch(this.sessionId);
    if (batch.stopped) {
      this.phase = "stopped";
      this.stopReason = batch.reason;
      this.batch = [];
      this.choices.clear();
      this.emit();
      return;
    }
    this.batch = batch.pairs;
    this.columns = batch.columns ?? [];
    if (batch.labels_used !== undefined) this.labelsUsed = batch.labels_used;
    if (batch.budget !== undefined) this.budget = batch.budget;
    this.choices.clear();
    this.phase = "labeling";
    this.error = null;
    this.emit();
  }

  choose(pair: { id1: number; id2: number }, label: boolean): void {
    if (this.phase !== "labeling" && this.phase !== "retryable") return;
    const key = pairId(pair);
    if (!this.batch.some((p) => pairId(p) === key)) return;
    this.choices.set(key, label);
    this.emit();
  }

  allLabeled(): boolean {
    return (
      this.batch.length > 0 &&
      this.batch.every((p) => this.choices.has(pairId(p)))
    );
  }

  /** Submit exactly the user's choices; no-op unless every card is labeled
   * and nothing else is in flight. */
  async submit(): Promise<void> {
    if (this.phase !== "labeling" && this.phase !== "retryable") return;
    if (!this.allLabeled() || !this.sessionId) return;
    const labels = this.batch.map((p) => ({
      id1: p.id1,
      id2: p.id2,
      label: this.choices.get(pairId(p))!,
    }));
    this.phase = "submitting";
    this.error = null;
    this.emit();
    try {
      const out = await this.api.submitLabels(this.sessionId, labels);
      this.views = out.views;
      this.history = out.state.history;
      this.lastChange = out.view_change;
      this.labelsUsed = out.state.labels_used;
      this.viewVersion += 1;
      if (out.stopped) {
        this.phase = "stopped";
        this.stopReason = out.reason;
        this.batch = [];
        this.choices.clear();
        this.emit();
        return;
      }
      await this.pullBatch();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // the submit landed previously (or the batch moved on): the server
        // batch is authoritative, re-fetch it instead of re-posting
        await this.recover();
        return;
      }
      this.phase = "retryable";
      this.error = err instanceof Error ? err.message : String(err);
      this.emit();
    }
  }

  /** After a network failure: re-fetch the outstanding batch idempotently.
   * If it is still the same batch the choices survive and the user may
   * submit again; if it moved on, the earlier submit landed and we catch
   * up without re-posting. */
  async retry(): Promise<void> {
    if (this.phase !== "retryable") return;
    await this.recover();
  }

  private async recover(): Promise<void> {
    if (!this.sessionId) return;
    const previous = this.batch.map(pairId).join(",");
    const batch = await this.api.batch(this.sessionId);
    if (batch.stopped) {
      const views = await this.api.views(this.sessionId);
      this.views = views.views;
      this.history = views.history;
      this.viewVersion += 1;
      this.phase = "stopped";
      this.stopReason = batch.reason;
      this.batch = [];
      this.choices.clear();
      this.emit();
      return;
    }
    const current = batch.pairs.map(pairId).join(",");
    if (current === previous) {
      // same batch still outstanding: keep the choices, allow resubmit
      this.batch = batch.pairs;
      this.phase = "labeling";
      this.error = null;
      this.emit();
      return;
    }
    // the earlier submit landed: refresh the panel and adopt the new batch
    const views = await this.api.views(this.sessionId);
    this.views = views.views;
    this.history = views.history;
    this.viewVersion += 1;
    const desc = await this.api.descriptor(this.sessionId);
    this.labelsUsed = desc.labels_used;
    this.batch = batch.pairs;
    this.columns = batch.columns ?? this.columns;
    this.choices.clear();
    this.phase = "labeling";
    this.error = null;
    this.emit();
  }
}
