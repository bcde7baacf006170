/** Wire protocol shared with the game server: JSON messages over a
 * websocket at `/play`. The client sends join / input / ping; the server
 * sends session_start / state_update / round_end / error / pong. */

export type ActionName =
  | "up"
  | "down"
  | "left"
  | "right"
  | "interact"
  | "stay";

export const ACTION_NAMES: ActionName[] = [
  "up",
  "down",
  "left",
  "right",
  "interact",
  "stay",
];

/** Held-object codes in state_update arrays. */
export const HELD = { nothing: 0, onion: 1, dish: 2, soup: 3 } as const;

export interface GameStateWire {
  positions: [number, number][];
  orientations: number[]; // 0 up, 1 down, 2 left, 3 right
  held: number[];
  pot_onions: number[];
  pot_timer: number[];
  counters: [number, number, number][]; // row, col, held-object code
  tick: number;
  score: number;
}

export interface SessionStart {
  type: "session_start";
  session_id: string;
  layout: string;
  grid: string[];
  seat: number;
  tick_ms: number;
  horizon: number;
  agent: string;
}

export interface StateUpdate {
  type: "state_update";
  tick: number;
  state: GameStateWire;
  score: number;
  reward: number;
  last_events: ({ kind: string; cell: [number, number] } | null)[];
  agent_subtask?: string;
}

export interface RoundEnd {
  type: "round_end";
  final_score: number;
  tick: number;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  message: string;
}

export interface Pong {
  type: "pong";
}

export type ServerMessage =
  | SessionStart
  | StateUpdate
  | RoundEnd
  | ErrorMessage
  | Pong;

export type ClientMessage =
  | { type: "join"; session_id?: string }
  | { type: "input"; action: ActionName }
  | { type: "ping" };

export class MalformedMessage extends Error {}

function expect(cond: boolean, what: string): asserts cond {
  if (!cond) throw new MalformedMessage(what);
}

/** Parse and structurally validate one server frame. Throws
 * MalformedMessage rather than returning a partial object, so the caller
 * can show an error overlay without a partial draw. */
export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch (e) {
    throw new MalformedMessage(`not JSON: ${e}`);
  }
  expect(typeof data === "object" && data !== null, "not an object");
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case "session_start":
      expect(typeof msg.session_id === "string", "session_id");
      expect(Array.isArray(msg.grid), "grid");
      expect(typeof msg.seat === "number", "seat");
      expect(typeof msg.tick_ms === "number", "tick_ms");
      expect(typeof msg.horizon === "number", "horizon");
      return msg as unknown as SessionStart;
    case "state_update": {
      expect(typeof msg.tick === "number", "tick");
      expect(typeof msg.score === "number", "score");
      const state = msg.state as Record<string, unknown> | undefined;
      expect(typeof state === "object" && state !== null, "state");
      for (const key of [
        "positions",
        "orientations",
        "held",
        "pot_onions",
        "pot_timer",
        "counters",
      ]) {
        expect(Array.isArray(state[key]), `state.${key}`);
      }
      return msg as unknown as StateUpdate;
    }
    case "round_end":
      expect(typeof msg.final_score === "number", "final_score");
      expect(typeof msg.tick === "number", "tick");
      return msg as unknown as RoundEnd;
    case "error":
      expect(typeof msg.code === "string", "code");
      expect(typeof msg.message === "string", "message");
      return msg as unknown as ErrorMessage;
    case "pong":
      return { type: "pong" };
    default:
      throw new MalformedMessage(`unknown type ${String(msg.type)}`);
  }
}
