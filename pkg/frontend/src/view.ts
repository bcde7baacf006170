/** Pure view model: the drawn frame is a function of the layout grid from
 * session_start plus the last authoritative state_update. The client never
 * simulates ahead. */

import { GameStateWire, SessionStart, StateUpdate } from "./protocol.js";

export type TileKind =
  | "floor"
  | "counter"
  | "onion_dispenser"
  | "dish_dispenser"
  | "pot"
  | "serving_window";

export type HeldName = "nothing" | "onion" | "dish" | "soup";
export type Facing = "up" | "down" | "left" | "right";

export interface PotView {
  row: number;
  col: number;
  onions: number; // fill marks to draw
  timer: number; // 0 = not cooking / ready
  ready: boolean;
}

export interface PlayerSprite {
  row: number;
  col: number;
  facing: Facing;
  held: HeldName;
  isHuman: boolean;
}

export interface ClientView {
  width: number;
  height: number;
  tiles: TileKind[][];
  players: PlayerSprite[];
  pots: PotView[];
  counterObjects: { row: number; col: number; object: HeldName }[];
  score: number;
  tick: number;
  ticksRemaining: number;
  agentSubtask: string | null;
}

const TILE_BY_GLYPH: Record<string, TileKind> = {
  " ": "floor",
  "1": "floor", // start cells are floor once the round runs
  "2": "floor",
  X: "counter",
  O: "onion_dispenser",
  D: "dish_dispenser",
  P: "pot",
  S: "serving_window",
};

const HELD_BY_CODE: HeldName[] = ["nothing", "onion", "dish", "soup"];
const FACING_BY_CODE: Facing[] = ["up", "down", "left", "right"];

export function parseGrid(grid: string[]): TileKind[][] {
  return grid.map((row) =>
    [...row].map((glyph) => {
      const tile = TILE_BY_GLYPH[glyph];
      if (tile === undefined) throw new Error(`unknown tile glyph ${glyph}`);
      return tile;
    }),
  );
}

function potViews(tiles: TileKind[][], state: GameStateWire): PotView[] {
  // Pot indices follow row-major order of pot tiles, matching the server.
  const pots: PotView[] = [];
  let i = 0;
  for (let r = 0; r < tiles.length; r++) {
    for (let c = 0; c < tiles[r].length; c++) {
      if (tiles[r][c] !== "pot") continue;
      const onions = state.pot_onions[i] ?? 0;
      const timer = state.pot_timer[i] ?? 0;
      pots.push({
        row: r,
        col: c,
        onions,
        timer,
        ready: onions > 0 && onions === 3 && timer === 0,
      });
      i += 1;
    }
  }
  return pots;
}

export function buildView(
  session: SessionStart,
  update: StateUpdate,
): ClientView {
  const tiles = parseGrid(session.grid);
  const state = update.state;
  const players: PlayerSprite[] = state.positions.map(([row, col], seat) => ({
    row,
    col,
    facing: FACING_BY_CODE[state.orientations[seat]],
    held: HELD_BY_CODE[state.held[seat]],
    isHuman: seat === session.seat,
  }));
  return {
    width: tiles[0].length,
    height: tiles.length,
    tiles,
    players,
    pots: potViews(tiles, state),
    counterObjects: state.counters.map(([row, col, code]) => ({
      row,
      col,
      object: HELD_BY_CODE[code],
    })),
    score: update.score,
    tick: update.tick,
    ticksRemaining: session.horizon - update.tick,
    agentSubtask: update.agent_subtask ?? null,
  };
}
