/** Browser entry point: wires the websocket client, keyboard input, and
 * canvas rendering to the DOM. Configuration via URL query parameters:
 * ?server=ws://host:port&session=<id>&subtask=off&debug=1 */

import { GameClient } from "./client.js";
import { InputGate } from "./input.js";
import { canvasSize, drawView } from "./render.js";
import { buildView } from "./view.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? `ws://${window.location.host}`;
const sessionId = params.get("session") ?? undefined;
const showSubtask = params.get("subtask") !== "off";
const debug = params.get("debug") === "1";

const canvas = document.getElementById("board") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const scoreEl = document.getElementById("score")!;
const timerEl = document.getElementById("timer")!;
const subtaskEl = document.getElementById("subtask")!;
const bannerEl = document.getElementById("banner")!;
const summaryEl = document.getElementById("summary")!;
const debugEl = document.getElementById("debug")!;

const gate = new InputGate();
let dirty = false;

const client = new GameClient(
  (url) => new WebSocket(`${url}/play`) as never,
  { url: server, sessionId },
  {
    onSessionStart: (msg) => {
      bannerEl.hidden = true;
      summaryEl.hidden = true;
      gate.reset();
      const probe = buildView(msg, {
        type: "state_update",
        tick: 0,
        score: 0,
        reward: 0,
        last_events: [null, null],
        state: {
          positions: [[1, 1], [1, 2]],
          orientations: [1, 1],
          held: [0, 0],
          pot_onions: [],
          pot_timer: [],
          counters: [],
          tick: 0,
          score: 0,
        },
      });
      const size = canvasSize(probe);
      canvas.width = size.width;
      canvas.height = size.height;
    },
    onStateUpdate: () => {
      dirty = true;
    },
    onRoundEnd: (msg) => {
      summaryEl.textContent = `Round over — final score ${msg.final_score}`;
      summaryEl.hidden = false;
    },
    onServerError: (msg) => {
      bannerEl.textContent = `Server error: ${msg.code}: ${msg.message}`;
      bannerEl.hidden = false;
    },
    onStatusChange: (status) => {
      bannerEl.textContent =
        status === "reconnecting" ? "Connection lost — reconnecting…" : "";
      bannerEl.hidden = status !== "reconnecting";
    },
    onMalformed: (err) => {
      bannerEl.textContent = `Bad server frame: ${err.message}`;
      bannerEl.hidden = false;
    },
  },
);

window.addEventListener("keydown", (ev) => {
  if (!client.session || !client.lastUpdate) return;
  const action = gate.onKey(ev.key, client.lastUpdate.tick);
  if (action) {
    ev.preventDefault();
    client.sendInput(action);
  }
});

function frame(): void {
  if (dirty && client.session && client.lastUpdate) {
    dirty = false;
    const view = buildView(client.session, client.lastUpdate);
    drawView(ctx, view);
    scoreEl.textContent = `Score ${view.score}`;
    timerEl.textContent = `Ticks left ${view.ticksRemaining}`;
    subtaskEl.textContent =
      showSubtask && view.agentSubtask
        ? `Agent sub-task: ${view.agentSubtask}`
        : "";
    if (debug) {
      debugEl.textContent =
        `updates ${client.updatesSeen} dropped ${client.droppedUpdates} ` +
        `tick ${view.tick}`;
    }
  }
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);
