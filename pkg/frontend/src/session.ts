import { ApiError, type Api } from "./api.js";
import type { ConnectionState } from "./events.js";
import type {
  FinishedPayload,
  Mode,
  SessionView,
  StreamEvent,
} from "./protocol.js";

export type Phase = "idle" | "loading" | "active" | "finished";

export interface UiState {
  phase: Phase;
  view: SessionView | null;
  /** candidate_id picked in the radio list; null until the user picks */
  picked: string | null;
  reply: string;
  rating: number | null;
  busy: boolean;
  /** inline notice for local validation failures and server rejections */
  notice: string | null;
  connection: ConnectionState;
  finish: FinishedPayload | null;
}

export const MIN_INTERACTIONS = 5;

function candidateIds(view: SessionView | null): string {
  return (view?.candidates ?? []).map((c) => c.candidate_id).join("|");
}

/**
 * Client-side session state machine.
 *
 * Holds the latest server view plus the user's in-progress turn (picked
 * candidate, reply draft, rating draft). All mutations funnel through here
 * so the renderer stays a pure function of the snapshot. The server remains
 * the source of truth: every successful call and every stream event replaces
 * the view wholesale.
 */
export class SessionController {
  private state: UiState = {
    phase: "idle",
    view: null,
    picked: null,
    reply: "",
    rating: null,
    busy: false,
    notice: null,
    connection: "closed",
    finish: null,
  };
  private listeners: Array<(s: UiState) => void> = [];

  constructor(private readonly api: Api) {}

  snapshot(): UiState {
    return { ...this.state, view: this.state.view };
  }

  onChange(listener: (s: UiState) => void): void {
    this.listeners.push(listener);
  }

  private patch(partial: Partial<UiState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.snapshot());
  }

  /** Replace the view; clears the turn draft when the staged turn changed. */
  private acceptView(view: SessionView): void {
    const turnChanged = candidateIds(view) !== candidateIds(this.state.view);
    this.patch({
      view,
      phase: view.status === "finished" ? "finished" : "active",
      ...(turnChanged ? { picked: null, reply: "" } : {}),
    });
  }

  get sessionId(): string | null {
    return this.state.view?.session_id ?? null;
  }

  async start(mode: Mode, articleId?: string): Promise<void> {
    this.patch({ phase: "loading", notice: null });
    try {
      this.acceptView(await this.api.createSession(mode, articleId));
    } catch (err) {
      this.patch({ phase: "idle", notice: describe(err) });
      throw err;
    }
  }

  /** Rebuild state from the server, e.g. after a page reload. */
  async restore(sessionId: string): Promise<void> {
    this.patch({ phase: "loading", notice: null });
    this.acceptView(await this.api.getSession(sessionId));
  }

  pick(candidateId: string): void {
    const staged = this.state.view?.candidates ?? [];
    if (!staged.some((c) => c.candidate_id === candidateId)) return;
    this.patch({ picked: candidateId, notice: null });
  }

  setReply(text: string): void {
    this.patch({ reply: text });
  }

  setRating(rating: number | null): void {
    this.patch({ rating });
  }

  /** True once the reply box should accept input (a candidate is picked). */
  get replyEnabled(): boolean {
    const view = this.state.view;
    if (view === null || view.status !== "active") return false;
    if (view.mode === "live") return true;
    return this.state.picked !== null;
  }

  /** Submit the current turn: selection + reply in collect, text in live. */
  async submit(): Promise<void> {
    const view = this.state.view;
    if (view === null || view.status !== "active" || this.state.busy) return;
    const reply = this.state.reply.trim();
    if (view.mode === "collect" && this.state.picked === null) {
      this.patch({ notice: "Pick one of the candidate responses first." });
      return;
    }
    if (reply === "") {
      this.patch({ notice: "Write a reply before sending." });
      return;
    }
    this.patch({ busy: true, notice: null });
    try {
      if (view.mode === "collect") {
        const next = await this.api.selectCandidate(
          view.session_id,
          this.state.picked as string,
          reply,
        );
        this.acceptView(next);
      } else {
        await this.api.postMessage(view.session_id, reply);
        this.acceptView(await this.api.getSession(view.session_id));
        this.patch({ reply: "" });
      }
    } catch (err) {
      this.patch({ notice: describe(err) });
    } finally {
      this.patch({ busy: false });
    }
  }

  /** Whether the finish control should be rendered at all. */
  get finishVisible(): boolean {
    return this.state.view?.can_finish === true;
  }

  async finish(): Promise<void> {
    const view = this.state.view;
    if (view === null || !view.can_finish || this.state.busy) return;
    const rating = this.state.rating;
    if (view.mode === "collect") {
      if (rating === null || !Number.isInteger(rating) || rating < 1 || rating > 5) {
        this.patch({ notice: "A rating between 1 and 5 is required." });
        return;
      }
    }
    this.patch({ busy: true, notice: null });
    try {
      const finish = await this.api.finishSession(view.session_id, rating);
      // refetch so the closing transcript stays visible on the final screen
      const closed = await this.api.getSession(view.session_id);
      this.patch({ finish });
      this.acceptView(closed);
    } catch (err) {
      this.patch({ notice: describe(err) });
    } finally {
      this.patch({ busy: false });
    }
  }

  setConnection(connection: ConnectionState): void {
    this.patch({ connection });
  }

  /** Fold a stream event into local state; views always win. */
  applyEvent(event: StreamEvent): void {
    switch (event.type) {
      case "view":
      case "session_created":
      case "candidates": {
        const { type: _ignored, ...view } = event;
        this.acceptView(view as SessionView);
        break;
      }
      case "selection":
        if (this.state.view !== null) {
          this.patch({ view: { ...this.state.view, selection_pending: true } });
        }
        break;
      case "finished":
        this.patch({ finish: event });
        if (this.state.view !== null) {
          this.patch({
            phase: "finished",
            view: {
              ...this.state.view,
              status: "finished",
              rating: event.rating,
              can_finish: false,
              candidates: null,
            },
          });
        }
        break;
      case "reply":
      case "error":
        break;
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return `Connection problem: ${err.message}`;
  return "Something went wrong talking to the server.";
}
