// One WebSocket per session with automatic reconnect. On reconnect the
// state re-syncs from GET /api/sessions/{id} before live messages resume.

import type { ApiClient } from "./api.js";
import {
  clientMessage,
  isServerMessage,
  type ClientMessage,
  type ClientType,
  type ServerMessage,
  type SessionSnapshot,
} from "./protocol.js";

type WebSocketLike = {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
};

export type WebSocketCtor = new (url: string) => WebSocketLike;

export interface GameSocketHandlers {
  onMessage(message: ServerMessage): void;
  onResync(snapshot: SessionSnapshot): void;
  onStatus(connected: boolean): void;
}

const RECONNECT_DELAY_MS = 1000;
const MAX_RECONNECT_DELAY_MS = 10_000;

export class GameSocket {
  private ws: WebSocketLike | null = null;
  private closed = false;
  private delay = RECONNECT_DELAY_MS;
  private everConnected = false;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly handlers: GameSocketHandlers,
    private readonly wsCtor: WebSocketCtor = (globalThis as { WebSocket?: WebSocketCtor })
      .WebSocket as WebSocketCtor,
  ) {
    if (!this.wsCtor) throw new Error("no WebSocket implementation available");
  }

  connect(): void {
    if (this.closed) return;
    const ws = new this.wsCtor(this.api.wsUrl(this.sessionId));
    this.ws = ws;
    ws.onopen = () => {
      this.delay = RECONNECT_DELAY_MS;
      this.handlers.onStatus(true);
      if (this.everConnected) {
        // missed broadcasts while away; pull the authoritative snapshot
        void this.api
          .getSession(this.sessionId)
          .then((snapshot) => this.handlers.onResync(snapshot))
          .catch(() => undefined);
      }
      this.everConnected = true;
    };
    ws.onmessage = (event) => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(String(event.data));
      } catch {
        return;
      }
      if (isServerMessage(parsed)) this.handlers.onMessage(parsed);
    };
    ws.onclose = () => {
      this.handlers.onStatus(false);
      if (!this.closed) {
        setTimeout(() => this.connect(), this.delay);
        this.delay = Math.min(this.delay * 2, MAX_RECONNECT_DELAY_MS);
      }
    };
    ws.onerror = () => {
      // onclose follows and owns the retry
    };
  }

  send(type: ClientType, payload?: Record<string, unknown>): void {
    const message: ClientMessage = clientMessage(type, payload);
    if (!this.ws) throw new Error("socket not connected");
    this.ws.send(JSON.stringify(message));
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
