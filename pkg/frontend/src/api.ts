// Thin HTTP helpers over the session server's JSON endpoints.

import type { SessionSnapshot } from "./protocol.js";

export interface PatternEntry {
  rgs: string;
  diagram: import("./protocol.js").DiagramJson;
  svg: string;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: string; detail?: string };
        detail = body.error ?? body.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new Error(detail);
    }
    return (await response.json()) as T;
  }

  createSession(token: string): Promise<SessionSnapshot> {
    return this.json("/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token }),
    });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.json(`/api/sessions/${sessionId}`);
  }

  patterns(): Promise<{ patterns: PatternEntry[] }> {
    return this.json("/api/patterns");
  }

  bookmarkUrl(sessionId: string): string {
    return `${this.baseUrl}/api/sessions/${sessionId}/bookmark.svg`;
  }

  wsUrl(sessionId: string): string {
    return this.baseUrl.replace(/^http/, "ws") + `/ws/${sessionId}`;
  }
}

export function tokenFromSearch(search: string): string | null {
  return new URLSearchParams(search).get("t");
}
