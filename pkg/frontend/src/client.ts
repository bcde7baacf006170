/** Websocket game client: joins a session, tracks the authoritative state,
 * counts dropped updates, and reconnects (resuming as a spectator of the
 * live session) after connection loss. */

import {
  ClientMessage,
  ErrorMessage,
  RoundEnd,
  ServerMessage,
  SessionStart,
  StateUpdate,
  parseServerMessage,
} from "./protocol.js";

/** The subset of WebSocket the client uses; tests supply a fake. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
  onerror: ((ev: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus = "connecting" | "live" | "reconnecting" | "ended";

export interface ClientEvents {
  onSessionStart?: (msg: SessionStart) => void;
  onStateUpdate?: (msg: StateUpdate) => void;
  onRoundEnd?: (msg: RoundEnd) => void;
  onServerError?: (msg: ErrorMessage) => void;
  onStatusChange?: (status: ConnectionStatus) => void;
  onMalformed?: (error: Error) => void;
}

export interface GameClientOptions {
  url: string;
  sessionId?: string; // rejoin/spectate an existing session
  reconnectDelayMs?: number;
  scheduler?: (fn: () => void, ms: number) => void;
}

export class GameClient {
  session: SessionStart | null = null;
  lastUpdate: StateUpdate | null = null;
  roundEnd: RoundEnd | null = null;
  status: ConnectionStatus = "connecting";
  droppedUpdates = 0;
  updatesSeen = 0;

  private socket: SocketLike | null = null;
  private readonly factory: SocketFactory;
  private readonly events: ClientEvents;
  private readonly options: GameClientOptions;
  private lastTick = 0;

  constructor(
    factory: SocketFactory,
    options: GameClientOptions,
    events: ClientEvents = {},
  ) {
    this.factory = factory;
    this.options = options;
    this.events = events;
  }

  connect(): void {
    const socket = this.factory(this.options.url);
    this.socket = socket;
    socket.onopen = () => {
      const join: ClientMessage = { type: "join" };
      const sessionId = this.session?.session_id ?? this.options.sessionId;
      if (sessionId) (join as { session_id?: string }).session_id = sessionId;
      socket.send(JSON.stringify(join));
    };
    socket.onmessage = (ev) => this.handleFrame(ev.data);
    socket.onclose = () => this.handleClose();
    socket.onerror = () => {};
  }

  sendInput(action: string): void {
    if (this.status !== "live" || !this.socket) return;
    this.socket.send(JSON.stringify({ type: "input", action }));
  }

  private setStatus(status: ConnectionStatus): void {
    if (status === this.status) return;
    this.status = status;
    this.events.onStatusChange?.(status);
  }

  private handleFrame(raw: string): void {
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(raw);
    } catch (e) {
      this.events.onMalformed?.(e as Error);
      return;
    }
    switch (msg.type) {
      case "session_start":
        this.session = msg;
        this.setStatus("live");
        this.events.onSessionStart?.(msg);
        break;
      case "state_update":
        if (this.lastTick > 0 && msg.tick > this.lastTick + 1) {
          this.droppedUpdates += msg.tick - this.lastTick - 1;
        }
        this.lastTick = msg.tick;
        this.updatesSeen += 1;
        this.lastUpdate = msg;
        this.events.onStateUpdate?.(msg);
        break;
      case "round_end":
        this.roundEnd = msg;
        this.setStatus("ended");
        this.events.onRoundEnd?.(msg);
        break;
      case "error":
        this.events.onServerError?.(msg);
        break;
      case "pong":
        break;
    }
  }

  private handleClose(): void {
    if (this.status === "ended") return;
    this.setStatus("reconnecting");
    const delay = this.options.reconnectDelayMs ?? 1000;
    const schedule =
      this.options.scheduler ?? ((fn, ms) => setTimeout(fn, ms));
    schedule(() => {
      if (this.status === "reconnecting") this.connect();
    }, delay);
  }
}
