// Connection state machine for the step socket. Pure transitions; the
// socket wrapper owns the timers. The recording buffer lives on the
// server, so a drop loses nothing; the overlay says so.

export interface ConnState {
  phase: "connected" | "lost" | "retrying";
  attempt: number;
  delayMs: number;
}

const BASE_DELAY_MS = 500;
const MAX_DELAY_MS = 8000;

export function initialState(): ConnState {
  return { phase: "connected", attempt: 0, delayMs: 0 };
}

export function onDrop(s: ConnState): ConnState {
  return { phase: "lost", attempt: s.attempt, delayMs: 0 };
}

/** Next reconnect attempt with doubling backoff, capped. */
export function nextRetry(s: ConnState): ConnState {
  const attempt = s.attempt + 1;
  const delayMs = Math.min(BASE_DELAY_MS * 2 ** (attempt - 1), MAX_DELAY_MS);
  return { phase: "retrying", attempt, delayMs };
}

export function onOpen(): ConnState {
  return initialState();
}

export function overlayMessage(s: ConnState): string | null {
  if (s.phase === "connected") return null;
  const status = s.phase === "lost"
    ? "connection lost"
    : `reconnecting (attempt ${s.attempt})`;
  return `${status}; the recording is preserved on the server`;
}
