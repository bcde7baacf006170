/** Keyboard mapping and the one-input-per-tick-window rule.
 *
 * Bindings: arrow keys / WASD move, space interacts. The most recent key
 * pressed inside a tick window wins on the server side, but the client
 * sends at most one input per window: the first keypress of the window is
 * sent, later ones inside the same window are dropped locally. */

import { ActionName } from "./protocol.js";

export const KEY_BINDINGS: Record<string, ActionName> = {
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
  w: "up",
  s: "down",
  a: "left",
  d: "right",
  " ": "interact",
};

export class InputGate {
  private lastSentTick = -1;

  /** Maps a key event to the action to send, or null if the key is
   * unbound or an input was already sent this tick window. `tick` is the
   * tick of the last state_update. */
  onKey(key: string, tick: number): ActionName | null {
    const action = KEY_BINDINGS[key];
    if (action === undefined) return null;
    if (tick === this.lastSentTick) return null;
    this.lastSentTick = tick;
    return action;
  }

  reset(): void {
    this.lastSentTick = -1;
  }
}
