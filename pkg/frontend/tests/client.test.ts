import { describe, expect, it } from "vitest";

import { GameClient, SocketLike } from "../src/client.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onopen: (() => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }
  close(): void {
    this.closed = true;
  }
  open(): void {
    this.onopen?.();
  }
  push(msg: unknown): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }
}

const START = {
  type: "session_start",
  session_id: "sess-1",
  layout: "cramped_room",
  grid: ["XXPXX", "O1 2O", "X   X", "XDXSX"],
  seat: 0,
  tick_ms: 200,
  horizon: 400,
  agent: "scripted_greedy",
};

function stateUpdate(tick: number) {
  return {
    type: "state_update",
    tick,
    score: 0,
    reward: 0,
    last_events: [null, null],
    state: {
      positions: [
        [1, 1],
        [1, 3],
      ],
      orientations: [1, 1],
      held: [0, 0],
      pot_onions: [0],
      pot_timer: [0],
      counters: [],
      tick,
      score: 0,
    },
  };
}

function makeClient(options: Record<string, unknown> = {}, events = {}) {
  const sockets: FakeSocket[] = [];
  const scheduled: (() => void)[] = [];
  const client = new GameClient(
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    {
      url: "ws://test",
      scheduler: (fn) => scheduled.push(fn),
      ...options,
    },
    events,
  );
  return { client, sockets, scheduled };
}

describe("GameClient", () => {
  it("joins on open and tracks the authoritative state", () => {
    const { client, sockets } = makeClient();
    client.connect();
    const sock = sockets[0];
    sock.open();
    expect(JSON.parse(sock.sent[0])).toEqual({ type: "join" });
    sock.push(START);
    expect(client.status).toBe("live");
    sock.push(stateUpdate(1));
    sock.push(stateUpdate(2));
    expect(client.lastUpdate?.tick).toBe(2);
    expect(client.updatesSeen).toBe(2);
    expect(client.droppedUpdates).toBe(0);
  });

  it("requests a specific session when configured", () => {
    const { client, sockets } = makeClient({ sessionId: "old-sess" });
    client.connect();
    sockets[0].open();
    expect(JSON.parse(sockets[0].sent[0])).toEqual({
      type: "join",
      session_id: "old-sess",
    });
  });

  it("counts dropped updates from tick gaps", () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].open();
    sockets[0].push(START);
    sockets[0].push(stateUpdate(1));
    sockets[0].push(stateUpdate(4)); // ticks 2 and 3 never arrived
    expect(client.droppedUpdates).toBe(2);
  });

  it("round_end ends the session with the final score", () => {
    const events: { score?: number } = {};
    const { client, sockets } = makeClient(
      {},
      {
        onRoundEnd: (msg: { final_score: number }) => {
          events.score = msg.final_score;
        },
      },
    );
    client.connect();
    sockets[0].open();
    sockets[0].push(START);
    sockets[0].push({ type: "round_end", final_score: 80, tick: 400 });
    expect(client.status).toBe("ended");
    expect(events.score).toBe(80);
  });

  it("reconnects after connection loss and rejoins the same session", () => {
    const statuses: string[] = [];
    const { client, sockets, scheduled } = makeClient(
      {},
      { onStatusChange: (s: string) => statuses.push(s) },
    );
    client.connect();
    sockets[0].open();
    sockets[0].push(START);
    sockets[0].onclose?.();
    expect(client.status).toBe("reconnecting");
    expect(scheduled).toHaveLength(1);
    scheduled[0](); // retry timer fires
    sockets[1].open();
    expect(JSON.parse(sockets[1].sent[0])).toEqual({
      type: "join",
      session_id: "sess-1",
    });
    sockets[1].push(START);
    expect(client.status).toBe("live");
    expect(statuses).toEqual(["live", "reconnecting", "live"]);
  });

  it("does not reconnect after a finished round", () => {
    const { client, sockets, scheduled } = makeClient();
    client.connect();
    sockets[0].open();
    sockets[0].push(START);
    sockets[0].push({ type: "round_end", final_score: 0, tick: 400 });
    sockets[0].onclose?.();
    expect(client.status).toBe("ended");
    expect(scheduled).toHaveLength(0);
  });

  it("inputs only flow while live", () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].open();
    client.sendInput("up"); // not live yet: dropped
    sockets[0].push(START);
    client.sendInput("up");
    const inputs = sockets[0].sent
      .map((s) => JSON.parse(s))
      .filter((m) => m.type === "input");
    expect(inputs).toEqual([{ type: "input", action: "up" }]);
  });

  it("surfaces malformed frames without applying them", () => {
    const errors: string[] = [];
    const { client, sockets } = makeClient(
      {},
      { onMalformed: (e: Error) => errors.push(e.message) },
    );
    client.connect();
    sockets[0].open();
    sockets[0].push(START);
    sockets[0].onmessage?.({ data: "garbage" });
    expect(errors).toHaveLength(1);
    expect(client.lastUpdate).toBeNull();
  });
});
