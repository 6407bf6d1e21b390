// Thin typed client over the session endpoints.

import type {
  BatchPayload,
  CreateSessionRequest,
  LabelChoice,
  SessionDescriptor,
  SubmitResponse,
  ViewsResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function parse<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = String(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

/** What the session flow needs from a transport. */
export interface SessionApi {
  createSession(req: CreateSessionRequest): Promise<SessionDescriptor>;
  descriptor(sessionId: string): Promise<SessionDescriptor>;
  batch(sessionId: string): Promise<BatchPayload>;
  submitLabels(sessionId: string, labels: LabelChoice[]): Promise<SubmitResponse>;
  views(sessionId: string): Promise<ViewsResponse>;
}

export class ApiClient implements SessionApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createSession(req: CreateSessionRequest): Promise<SessionDescriptor> {
    const resp = await this.fetchFn(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    return parse<SessionDescriptor>(resp);
  }

  async descriptor(sessionId: string): Promise<SessionDescriptor> {
    return parse(await this.fetchFn(this.url(`/sessions/${sessionId}`)));
  }

  async batch(sessionId: string): Promise<BatchPayload> {
    return parse(await this.fetchFn(this.url(`/sessions/${sessionId}/batch`)));
  }

  async submitLabels(sessionId: string, labels: LabelChoice[]): Promise<SubmitResponse> {
    const resp = await this.fetchFn(this.url(`/sessions/${sessionId}/labels`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ labels }),
    });
    return parse<SubmitResponse>(resp);
  }

  async views(sessionId: string): Promise<ViewsResponse> {
    return parse(await this.fetchFn(this.url(`/sessions/${sessionId}/view`)));
  }
}
