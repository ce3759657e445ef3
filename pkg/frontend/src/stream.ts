// Server event stream over WebSocket with cursor resume.
//
// On drop: exponential backoff (500ms doubling, capped at 10s) and a
// reconnect that passes the last seen seq as the cursor, so the server
// replays exactly what was missed. The WebSocket constructor and the
// timer are injected: unit tests drive both synthetically, the browser
// and node each pass their own.

export interface WsLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;
export type Scheduler = (fn: () => void, delayMs: number) => unknown;

export interface StreamCallbacks {
  onEvent(event: Record<string, unknown>): void;
  onConnectionChange(state: "connecting" | "open" | "reconnecting"): void;
}

export const BACKOFF_BASE_MS = 500;
export const BACKOFF_CAP_MS = 10_000;

export class EventStream {
  private socket: WsLike | null = null;
  private attempts = 0;
  private closed = false;
  cursor = 0;

  constructor(
    private urlFor: (cursor: number) => string,
    private callbacks: StreamCallbacks,
    private wsFactory: WsFactory,
    private schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {}

  connect(): void {
    if (this.closed) return;
    this.callbacks.onConnectionChange(this.attempts === 0 ? "connecting" : "reconnecting");
    const socket = this.wsFactory(this.urlFor(this.cursor));
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.callbacks.onConnectionChange("open");
    };
    socket.onmessage = (ev) => {
      let parsed: Record<string, unknown>;
      try {
        parsed = JSON.parse(String(ev.data));
      } catch {
        return;
      }
      const seq = parsed["seq"];
      if (typeof seq === "number") {
        if (seq <= this.cursor) return; // already seen before the drop
        this.cursor = seq;
      }
      this.callbacks.onEvent(parsed);
    };
    socket.onclose = () => this.scheduleReconnect();
    socket.onerror = () => {
      // onclose follows; nothing to do here
    };
  }

  backoffDelay(): number {
    return Math.min(BACKOFF_BASE_MS * 2 ** this.attempts, BACKOFF_CAP_MS);
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    this.callbacks.onConnectionChange("reconnecting");
    const delay = this.backoffDelay();
    this.attempts += 1;
    this.schedule(() => this.connect(), delay);
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
