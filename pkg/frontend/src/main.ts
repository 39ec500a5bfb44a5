// App shell: join with a token, mirror the server over one socket,
// re-render the phase screen on every state change.

import { ApiClient, tokenFromSearch } from "./api.js";
import type { ClientType } from "./protocol.js";
import { renderScreen } from "./screens.js";
import { GameSocket, type WebSocketCtor } from "./socket.js";
import { initialState, reduce, type ClientState } from "./state.js";

export interface AppOptions {
  baseUrl: string;
  wsCtor?: WebSocketCtor;
}

export class App {
  readonly api: ApiClient;
  private state: ClientState | null = null;
  private socket: GameSocket | null = null;

  constructor(private readonly root: HTMLElement, private readonly options: AppOptions) {
    this.api = new ApiClient(options.baseUrl);
  }

  getState(): ClientState | null {
    return this.state;
  }

  async join(token: string): Promise<string> {
    const snapshot = await this.api.createSession(token);
    this.state = initialState(snapshot.session_id);
    this.socket = new GameSocket(
      this.api,
      snapshot.session_id,
      {
        onMessage: (message) => {
          if (this.state) {
            this.state = reduce(this.state, message);
            this.render();
          }
        },
        onResync: (resynced) => {
          if (this.state) {
            this.state = reduce(this.state, {
              v: 1,
              type: "phase",
              session_id: resynced.session_id,
              seq_no: resynced.seq_no,
              payload: resynced as unknown as Record<string, unknown>,
            });
            this.render();
          }
        },
        onStatus: (connected) => {
          if (this.state) {
            this.state = { ...this.state, connected };
            this.render();
          }
        },
      },
      this.options.wsCtor,
    );
    this.socket.connect();
    this.render();
    return snapshot.session_id;
  }

  dispatch = (type: ClientType, payload?: Record<string, unknown>): void => {
    this.socket?.send(type, payload);
  };

  render(): void {
    if (!this.state) return;
    const screen = renderScreen(
      this.state,
      this.dispatch,
      this.api.bookmarkUrl(this.state.sessionId),
    );
    this.root.replaceChildren(screen);
  }

  close(): void {
    this.socket?.close();
  }
}

function renderJoinForm(root: HTMLElement, app: App, prefill: string): void {
  const wrap = document.createElement("div");
  wrap.className = "app";
  wrap.innerHTML = `
    <section class="screen join">
      <h1>Join a game</h1>
      <p class="lede">Scan the table's code, or paste its token.</p>
      <input class="token" placeholder="token" value="${prefill}"/>
      <button class="action" data-action="join">join</button>
      <p class="banner error" hidden></p>
    </section>`;
  const input = wrap.querySelector("input")!;
  const error = wrap.querySelector(".error") as HTMLElement;
  wrap.querySelector("button")!.addEventListener("click", () => {
    void app.join(input.value.trim()).catch((exc: Error) => {
      error.textContent = exc.message;
      error.hidden = false;
    });
  });
  root.replaceChildren(wrap);
}

export async function boot(root: HTMLElement, options: AppOptions): Promise<App> {
  const app = new App(root, options);
  const token = tokenFromSearch(globalThis.location?.search ?? "");
  if (token) {
    await app.join(token);
  } else {
    renderJoinForm(root, app, "");
  }
  return app;
}
