/** Immediate-mode canvas rendering of a ClientView. No sprite assets:
 * colored rectangles and glyphs keep the client self-contained. */

import { ClientView, Facing, HeldName } from "./view.js";

export const CELL = 48;

const TILE_COLORS: Record<string, string> = {
  floor: "#d8c9a3",
  counter: "#8a6d3b",
  onion_dispenser: "#c9a227",
  dish_dispenser: "#9aa7b0",
  pot: "#444444",
  serving_window: "#3e7d3e",
};

const HELD_COLORS: Record<HeldName, string> = {
  nothing: "transparent",
  onion: "#e8b70b",
  dish: "#f2f2f2",
  soup: "#d86f1a",
};

const FACING_ARROW: Record<Facing, string> = {
  up: "↑",
  down: "↓",
  left: "←",
  right: "→",
};

export function canvasSize(view: ClientView): { width: number; height: number } {
  return { width: view.width * CELL, height: view.height * CELL };
}

export function drawView(
  ctx: CanvasRenderingContext2D,
  view: ClientView,
): void {
  for (let r = 0; r < view.height; r++) {
    for (let c = 0; c < view.width; c++) {
      ctx.fillStyle = TILE_COLORS[view.tiles[r][c]];
      ctx.fillRect(c * CELL, r * CELL, CELL, CELL);
      ctx.strokeStyle = "rgba(0,0,0,0.15)";
      ctx.strokeRect(c * CELL, r * CELL, CELL, CELL);
    }
  }

  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (const { row, col, object } of view.counterObjects) {
    ctx.fillStyle = HELD_COLORS[object];
    ctx.beginPath();
    ctx.arc(col * CELL + CELL / 2, row * CELL + CELL / 2, CELL / 5, 0, 7);
    ctx.fill();
  }

  for (const pot of view.pots) {
    const x = pot.col * CELL;
    const y = pot.row * CELL;
    for (let i = 0; i < pot.onions; i++) {
      ctx.fillStyle = HELD_COLORS.onion;
      ctx.beginPath();
      ctx.arc(x + 12 + i * 12, y + CELL - 12, 5, 0, 7);
      ctx.fill();
    }
    ctx.fillStyle = "#ffffff";
    ctx.font = "12px monospace";
    if (pot.ready) {
      ctx.fillText("READY", x + CELL / 2, y + 12);
    } else if (pot.timer > 0) {
      ctx.fillText(String(pot.timer), x + CELL / 2, y + 12);
    }
  }

  for (const player of view.players) {
    const cx = player.col * CELL + CELL / 2;
    const cy = player.row * CELL + CELL / 2;
    ctx.fillStyle = player.isHuman ? "#2762c4" : "#b03a3a";
    ctx.beginPath();
    ctx.arc(cx, cy, CELL / 3, 0, 7);
    ctx.fill();
    ctx.fillStyle = "#ffffff";
    ctx.font = "20px monospace";
    ctx.fillText(FACING_ARROW[player.facing], cx, cy);
    if (player.held !== "nothing") {
      ctx.fillStyle = HELD_COLORS[player.held];
      ctx.beginPath();
      ctx.arc(cx + CELL / 4, cy - CELL / 4, CELL / 7, 0, 7);
      ctx.fill();
    }
  }
}
