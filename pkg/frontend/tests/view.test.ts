import { describe, expect, it } from "vitest";

import { SessionStart, StateUpdate } from "../src/protocol.js";
import { buildView, parseGrid } from "../src/view.js";

const SESSION: SessionStart = {
  type: "session_start",
  session_id: "abc",
  layout: "cramped_room",
  grid: ["XXPXX", "O1 2O", "X   X", "XDXSX"],
  seat: 0,
  tick_ms: 200,
  horizon: 400,
  agent: "ha2",
};

function update(overrides: Partial<StateUpdate["state"]> = {}): StateUpdate {
  return {
    type: "state_update",
    tick: 10,
    score: 20,
    reward: 0,
    last_events: [null, null],
    agent_subtask: "place_onion_in_pot",
    state: {
      positions: [
        [1, 1],
        [1, 3],
      ],
      orientations: [0, 3],
      held: [3, 0],
      pot_onions: [2],
      pot_timer: [0],
      counters: [[2, 0, 1]],
      tick: 10,
      score: 20,
      ...overrides,
    },
  };
}

describe("parseGrid", () => {
  it("maps glyphs to tile kinds, start digits to floor", () => {
    const tiles = parseGrid(SESSION.grid);
    expect(tiles[0][2]).toBe("pot");
    expect(tiles[1][0]).toBe("onion_dispenser");
    expect(tiles[3][1]).toBe("dish_dispenser");
    expect(tiles[3][3]).toBe("serving_window");
    expect(tiles[1][1]).toBe("floor");
    expect(tiles[1][3]).toBe("floor");
    expect(tiles[0][0]).toBe("counter");
  });

  it("rejects unknown glyphs", () => {
    expect(() => parseGrid(["XZX"])).toThrow(/unknown tile glyph/);
  });
});

describe("buildView", () => {
  it("is a pure function of the last update", () => {
    const a = buildView(SESSION, update());
    const b = buildView(SESSION, update());
    expect(a).toEqual(b);
  });

  it("pot with 2 onions shows 2 fill marks", () => {
    const view = buildView(SESSION, update({ pot_onions: [2] }));
    expect(view.pots).toHaveLength(1);
    expect(view.pots[0]).toMatchObject({ row: 0, col: 2, onions: 2 });
    expect(view.pots[0].ready).toBe(false);
  });

  it("full pot with timer 0 reads ready", () => {
    const view = buildView(
      SESSION,
      update({ pot_onions: [3], pot_timer: [0] }),
    );
    expect(view.pots[0].ready).toBe(true);
    const cooking = buildView(
      SESSION,
      update({ pot_onions: [3], pot_timer: [12] }),
    );
    expect(cooking.pots[0].ready).toBe(false);
    expect(cooking.pots[0].timer).toBe(12);
  });

  it("player holding soup carries the soup glyph", () => {
    const view = buildView(SESSION, update({ held: [3, 0] }));
    expect(view.players[0].held).toBe("soup");
    expect(view.players[1].held).toBe("nothing");
  });

  it("marks the human seat and facing directions", () => {
    const view = buildView(SESSION, update());
    expect(view.players[0].isHuman).toBe(true);
    expect(view.players[1].isHuman).toBe(false);
    expect(view.players[0].facing).toBe("up");
    expect(view.players[1].facing).toBe("right");
  });

  it("exposes score, ticks remaining, counter objects, sub-task label", () => {
    const view = buildView(SESSION, update());
    expect(view.score).toBe(20);
    expect(view.ticksRemaining).toBe(390);
    expect(view.counterObjects).toEqual([{ row: 2, col: 0, object: "onion" }]);
    expect(view.agentSubtask).toBe("place_onion_in_pot");
  });

  it("sub-task label absent -> null", () => {
    const u = update();
    delete u.agent_subtask;
    expect(buildView(SESSION, u).agentSubtask).toBeNull();
  });
});
