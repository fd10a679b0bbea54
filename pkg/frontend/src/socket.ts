// WebSocket step loop with automatic reconnect. The server never ticks
// on its own, so the socket only carries what the input loop sends; on
// reopen the app re-syncs from GET /session/{id}/state.

import { ConnState, initialState, nextRetry, onDrop, onOpen } from "./reconnect.js";
import type { StepFrame, Vec2 } from "./types.js";

export interface StepSocketHandlers {
  onFrame: (frame: StepFrame) => void;
  onConnState: (s: ConnState) => void;
}

export class StepSocket {
  private ws: WebSocket | null = null;
  private conn: ConnState = initialState();
  private closed = false;

  constructor(private readonly sid: string,
              private readonly handlers: StepSocketHandlers) {}

  private url(): string {
    const proto = location.protocol === "https:" ? "wss:" : "ws:";
    return `${proto}//${location.host}/session/${this.sid}/step`;
  }

  connect(): void {
    if (this.closed) return;
    const ws = new WebSocket(this.url());
    this.ws = ws;
    ws.onopen = () => {
      this.conn = onOpen();
      this.handlers.onConnState(this.conn);
    };
    ws.onmessage = (ev) => {
      this.handlers.onFrame(JSON.parse(ev.data) as StepFrame);
    };
    ws.onclose = () => {
      if (this.closed) return;
      this.conn = onDrop(this.conn);
      this.handlers.onConnState(this.conn);
      this.scheduleRetry();
    };
  }

  private scheduleRetry(): void {
    this.conn = nextRetry(this.conn);
    this.handlers.onConnState(this.conn);
    setTimeout(() => this.connect(), this.conn.delayMs);
  }

  get ready(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(action: Vec2): boolean {
    if (!this.ready) return false;
    this.ws!.send(JSON.stringify({ a: action }));
    return true;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
