// JSON payloads of the labeling-session service.

export type CellValue = string | number | null;

export interface ViewPayload {
  schema: [string, "text" | "number"][];
  rows: CellValue[][];
}

export interface PairPayload {
  id1: number;
  id2: number;
  records: [Record<string, CellValue>, Record<string, CellValue>];
  impact: number;
}

export interface BatchPayload {
  stopped: boolean;
  reason: string | null;
  columns?: string[];
  pairs: PairPayload[];
  labels_used?: number;
  budget?: number;
}

export interface SessionDescriptor {
  id: string;
  dataset: string;
  views: string[];
  created_at: string;
  labels_used: number;
  budget: number;
  budget_left: number;
  batches_done: number;
  batch_size: number;
  last_view_change: number | null;
  history: number[];
  stopped: boolean;
  reason: string | null;
  digest: string;
}

export interface SubmitResponse {
  state: SessionDescriptor;
  views: Record<string, ViewPayload>;
  view_change: number;
  stopped: boolean;
  reason: string | null;
}

export interface ViewsResponse {
  views: Record<string, ViewPayload>;
  history: number[];
  stopped: boolean;
  reason: string | null;
}

export interface SessionConfig {
  budget?: number;
  batch?: number;
  initial_batch?: number;
  alpha?: number;
  strategy?: string;
  epsilon?: number;
  window?: number;
  seed?: number;
  kernel?: string;
  holdout?: boolean;
}

export interface CreateSessionRequest {
  dataset: string;
  view?: string;
  dashboard?: { views: string[]; aggregation: string };
  config?: SessionConfig;
  idempotency_key?: string;
}

export type LabelChoice = { id1: number; id2: number; label: boolean };

export function pairId(p: { id1: number; id2: number }): string {
  return `${p.id1}:${p.id2}`;
}
