// Thin REST client over the service. Errors carry the server's detail
// string so the UI can surface it inline (422 property unsatisfiable).

import type {
  DatasetSummary, MazePayload, RolloutResult, SaveResult,
  SessionCreated, SessionSnapshot, ServerInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(path, init);
  const body = await res.json().catch(() => ({}));
  if (!res.ok) {
    const detail = typeof body.detail === "string"
      ? body.detail : res.statusText;
    throw new ApiError(res.status, detail);
  }
  return body as T;
}

function post<T>(path: string, body?: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body ?? {}),
  });
}

export const api = {
  maze: () => request<MazePayload>("/maze"),
  info: () => request<ServerInfo>("/info"),
  createSession: () => post<SessionCreated>("/session"),
  resetSession: (sid: string) => post<SessionSnapshot>(`/session/${sid}/reset`),
  sessionState: (sid: string) => request<SessionSnapshot>(`/session/${sid}/state`),
  save: (sid: string) => post<SaveResult>(`/session/${sid}/save`),
  rollout: (body: unknown) => post<RolloutResult>("/rollout", body),
  datasetSummary: () => request<DatasetSummary>("/dataset/summary"),
};
