// Thin HTTP wrapper over the service API. fetch is injected so tests can
// record calls, node can pass its global fetch, and the browser its own.

import { PersonaPutBody } from "./persona.js";
import { TimelinePostWire, ToneLabels } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`api error ${status}`);
  }
}

export interface StateViewWire {
  tone_labels: ToneLabels;
  familiarity_band: string;
  current_behavior: string | null;
  debug?: Record<string, unknown>;
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let detail: unknown = null;
      try {
        detail = await response.json();
      } catch {
        detail = await response.text().catch(() => null);
      }
      throw new ApiError(response.status, detail);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    return (await response.json()) as T;
  }

  createSession(persona?: string): Promise<{ session_id: string }> {
    return this.request("/v1/sessions", {
      method: "POST",
      body: JSON.stringify(persona ? { persona } : {}),
    });
  }

  sendMessage(sessionId: string, text: string): Promise<{ message_id: string }> {
    return this.request(`/v1/sessions/${sessionId}/messages`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  getState(sessionId: string, debug = false): Promise<StateViewWire> {
    const suffix = debug ? "?debug=1" : "";
    return this.request(`/v1/sessions/${sessionId}/state${suffix}`);
  }

  getTimeline(sessionId: string): Promise<{ posts: TimelinePostWire[] }> {
    return this.request(`/v1/sessions/${sessionId}/timeline`);
  }

  react(sessionId: string, postId: number, kind: "like" | "comment", text?: string): Promise<void> {
    return this.request(`/v1/sessions/${sessionId}/timeline/${postId}/reactions`, {
      method: "POST",
      body: JSON.stringify(text === undefined ? { kind } : { kind, text }),
    });
  }

  getPersona(sessionId: string): Promise<{
    name: string;
    character_notes: string;
    baseline_motivation: Record<string, number>;
  }> {
    return this.request(`/v1/sessions/${sessionId}/persona`);
  }

  putPersona(sessionId: string, body: PersonaPutBody): Promise<unknown> {
    return this.request(`/v1/sessions/${sessionId}/persona`, {
      method: "PUT",
      body: JSON.stringify(body),
    });
  }

  advance(sessionId: string, ticks: number): Promise<{ tick: number }> {
    return this.request(`/v1/sessions/${sessionId}/advance`, {
      method: "POST",
      body: JSON.stringify({ ticks }),
    });
  }
}

export function streamUrl(baseUrl: string, sessionId: string, cursor: number): string {
  const ws = baseUrl.replace(/^http/, "ws");
  return `${ws}/v1/sessions/${sessionId}/stream?cursor=${cursor}`;
}
