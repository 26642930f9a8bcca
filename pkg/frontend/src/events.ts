import type { StreamEvent } from "./protocol.js";

export type ConnectionState = "connecting" | "online" | "reconnecting" | "closed";

export interface StreamHandlers {
  onEvent(event: StreamEvent): void;
  onState(state: ConnectionState): void;
}

interface SocketLike {
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  close(): void;
}

type SocketFactory = (url: string) => SocketLike;

const RECONNECT_BASE_MS = 500;
const RECONNECT_MAX_MS = 8000;

/**
 * Event-stream subscription with automatic reconnect.
 *
 * The stream is advisory: every payload the server pushes here is also the
 * response to some request, so a dropped connection only delays updates.
 * On each (re)connect the server replays a full view snapshot, which makes
 * missed events harmless.
 */
export class EventStream {
  private socket: SocketLike | null = null;
  private attempts = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: StreamHandlers,
    private readonly makeSocket: SocketFactory = (u) =>
      new WebSocket(u) as unknown as SocketLike,
  ) {}

  start(): void {
    this.stopped = false;
    this.open("connecting");
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.socket?.close();
    this.socket = null;
    this.handlers.onState("closed");
  }

  private open(state: ConnectionState): void {
    this.handlers.onState(state);
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.handlers.onState("online");
    };
    socket.onmessage = (ev) => {
      let parsed: StreamEvent;
      try {
        parsed = JSON.parse(String(ev.data)) as StreamEvent;
      } catch {
        return;
      }
      this.handlers.onEvent(parsed);
    };
    socket.onerror = () => {
      // the close handler owns reconnect scheduling
    };
    socket.onclose = () => {
      if (this.socket !== socket || this.stopped) return;
      this.socket = null;
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    const delay = Math.min(
      RECONNECT_MAX_MS,
      RECONNECT_BASE_MS * 2 ** Math.min(this.attempts, 4),
    );
    this.attempts += 1;
    this.handlers.onState("reconnecting");
    this.timer = setTimeout(() => {
      this.timer = null;
      if (!this.stopped) this.open("reconnecting");
    }, delay);
  }
}
