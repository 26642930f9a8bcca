import type {
  FinishedPayload,
  Mode,
  ReplyPayload,
  SessionView,
} from "./protocol.js";

/** A server rejection, carrying the status code and the server's message. */
export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

export interface Api {
  createSession(mode: Mode, articleId?: string): Promise<SessionView>;
  getSession(sessionId: string): Promise<SessionView>;
  postMessage(sessionId: string, text: string): Promise<ReplyPayload | SessionView>;
  selectCandidate(
    sessionId: string,
    candidateId: string,
    reply: string,
  ): Promise<SessionView>;
  finishSession(sessionId: string, rating: number | null): Promise<FinishedPayload>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the documented HTTP endpoints. */
export class ApiClient implements Api {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (i, init) => fetch(i, init)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof payload?.error === "string"
          ? payload.error
          : `request failed with status ${response.status}`;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  createSession(mode: Mode, articleId?: string): Promise<SessionView> {
    const body: Record<string, unknown> = { mode };
    if (articleId !== undefined) body.article_id = articleId;
    return this.call("POST", "/sessions", body);
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.call("GET", `/sessions/${sessionId}`);
  }

  postMessage(sessionId: string, text: string): Promise<ReplyPayload | SessionView> {
    return this.call("POST", `/sessions/${sessionId}/message`, { text });
  }

  selectCandidate(
    sessionId: string,
    candidateId: string,
    reply: string,
  ): Promise<SessionView> {
    return this.call("POST", `/sessions/${sessionId}/select`, {
      candidate_id: candidateId,
      reply,
    });
  }

  finishSession(sessionId: string, rating: number | null): Promise<FinishedPayload> {
    return this.call("POST", `/sessions/${sessionId}/finish`, { rating });
  }

  /** ws:// or wss:// address of the session's event stream. */
  eventsUrl(sessionId: string, locationOrigin: string): string {
    const origin = this.base || locationOrigin;
    return origin.replace(/^http/, "ws") + `/sessions/${sessionId}/events`;
  }
}
