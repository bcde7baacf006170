"""Real-time websocket game service: one human seat, one agent seat, ticks
paced at a fixed wall-clock interval with full-state broadcasts.

The state is server-authoritative. Each tick uses the most recent human input
received in the window (Stay when none arrived), queries the agent policy,
steps the engine, and broadcasts the full state. Rounds end at the horizon;
a replay log and a round record are persisted per round.
"""

from __future__ import annotations

import asyncio
import json
import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .agents.checkpoint import load_checkpoint
from .agents.policies import Policy, RandomPolicy, ScriptedGreedyPolicy
from .core.engine import step
from .core.layout import load_bundled_layout, render_layout
from .core.replay import write_replay_log
from .core.types import Action, DEFAULT_CONFIG, KitchenConfig, Layout, initial_state
from .subtasks import SubTask


class SessionLimitExceeded(Exception):
    pass


class CheckpointLoadFailure(Exception):
    pass


class ProtocolViolation(Exception):
    pass


ACTION_WIRE = {
    "up": Action.UP,
    "down": Action.DOWN,
    "left": Action.LEFT,
    "right": Action.RIGHT,
    "interact": Action.INTERACT,
    "stay": Action.STAY,
}
ACTION_NAMES = {v: k for k, v in ACTION_WIRE.items()}


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    layout_name: str = "cramped_room"
    agent: str = "scripted_greedy"  # checkpoint path, or scripted_greedy/random
    tick_ms: int = 200
    human_seat: Optional[int] = None  # None = random per session
    max_sessions: int = 8
    log_dir: str = "round_logs"
    checkpoint_dir: str = "."
    seed: int = 0

    @classmethod
    def from_env(cls, **overrides) -> "ServerConfig":
        env = {
            "host": os.environ.get("COOPKITCHEN_HOST"),
            "port": os.environ.get("COOPKITCHEN_PORT"),
            "checkpoint_dir": os.environ.get("COOPKITCHEN_CHECKPOINT_DIR"),
            "log_dir": os.environ.get("COOPKITCHEN_LOG_DIR"),
        }
        kwargs = {k: v for k, v in env.items() if v is not None}
        if "port" in kwargs:
            kwargs["port"] = int(kwargs["port"])
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


def _load_agent(config: ServerConfig) -> Policy:
    if config.agent == "scripted_greedy":
        return ScriptedGreedyPolicy()
    if config.agent == "random":
        return RandomPolicy()
    path = Path(config.checkpoint_dir) / config.agent
    if not path.exists():
        path = Path(config.agent)
    try:
        return load_checkpoint(path)
    except Exception as exc:
        raise CheckpointLoadFailure(f"{config.agent}: {exc}") from exc


class Session:
    def __init__(self, session_id: str, config: ServerConfig, layout: Layout,
                 agent: Policy, kitchen: KitchenConfig, rng: np.random.Generator):
        self.id = session_id
        self.config = config
        self.layout = layout
        self.kitchen = kitchen
        self.rng = rng
        if config.human_seat is None:
            self.human_seat = int(rng.integers(2))
        else:
            self.human_seat = config.human_seat
        self.agent_seat = 1 - self.human_seat
        self.agent_id = getattr(agent, "id", config.agent)
        self.actor = agent.session(layout, self.agent_seat)
        self.state = initial_state(layout)
        self.pending: Action = Action.STAY
        self.action_log: list[tuple[Action, Action]] = []
        self.sockets: list[WebSocket] = []
        self.done = False
        self.finished = asyncio.Event()
        self.tick_intervals: list[float] = []

    def session_start_message(self) -> dict:
        return {
            "type": "session_start",
            "session_id": self.id,
            "layout": self.layout.name,
            "grid": render_layout(self.layout).splitlines(),
            "seat": self.human_seat,
            "tick_ms": self.config.tick_ms,
            "horizon": self.kitchen.horizon,
            "agent": self.agent_id,
        }

    def advance(self) -> dict:
        human_action = self.pending
        self.pending = Action.STAY
        if hasattr(self.actor, "act_with_subtask"):
            task, agent_action = self.actor.act_with_subtask(self.state, self.rng)
            task_name = SubTask(task).wire_name
        else:
            agent_action = self.actor.act(self.state, self.rng)
            task_name = None
        joint = [None, None]
        joint[self.human_seat] = human_action
        joint[self.agent_seat] = agent_action
        outcome = step(self.state, tuple(joint), self.layout, self.kitchen)
        self.state = outcome.next
        self.action_log.append(tuple(joint))
        if self.state.tick >= self.kitchen.horizon:
            self.done = True
        events = [
            None if ev is None else {
                "kind": SubTask(int(ev.kind)).wire_name,
                "cell": list(ev.cell),
            }
            for ev in outcome.events
        ]
        msg = {
            "type": "state_update",
            "tick": self.state.tick,
            "state": self.state.to_dict(),
            "score": int(self.state.score),
            "reward": int(outcome.reward),
            "last_events": events,
        }
        if task_name is not None:
            msg["agent_subtask"] = task_name
        return msg

    def persist(self) -> Path:
        log_dir = Path(self.config.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        replay_path = log_dir / f"{self.id}.replay.jsonl"
        write_replay_log(replay_path, self.layout.name, self.config.seed,
                         self.action_log, self.kitchen.horizon)
        record = {
            "session_id": self.id,
            "layout": self.layout.name,
            "agent": self.agent_id,
            "human_seat": self.human_seat,
            "final_score": int(self.state.score),
            "replay_path": str(replay_path),
            "wall_clock": time.time(),
        }
        with (log_dir / "rounds.jsonl").open("a") as f:
            f.write(json.dumps(record) + "\n")
        return replay_path


async def _broadcast(session: Session, message: dict) -> None:
    data = json.dumps(message)
    dead = []
    for ws in session.sockets:
        try:
            await ws.send_text(data)
        except Exception:
            dead.append(ws)
    for ws in dead:
        session.sockets.remove(ws)


async def _ticker(session: Session) -> None:
    try:
        await _run_ticks(session)
    except Exception:
        import traceback

        traceback.print_exc()
        session.done = True
        session.finished.set()


async def _run_ticks(session: Session) -> None:
    interval = session.config.tick_ms / 1000.0
    loop = asyncio.get_running_loop()
    next_deadline = loop.time() + interval
    last = loop.time()
    while not session.done:
        await asyncio.sleep(max(next_deadline - loop.time(), 0.0))
        now = loop.time()
        session.tick_intervals.append(now - last)
        last = now
        next_deadline += interval
        msg = session.advance()
        await _broadcast(session, msg)
    session.persist()
    await _broadcast(session, {
        "type": "round_end",
        "final_score": int(session.state.score),
        "tick": session.state.tick,
    })
    # sockets are closed by their own handlers once they observe `finished`
    session.finished.set()


def create_app(config: ServerConfig, kitchen: KitchenConfig = DEFAULT_CONFIG) -> FastAPI:
    app = FastAPI()
    layout = load_bundled_layout(config.layout_name)
    agent = _load_agent(config)
    sessions: dict[str, Session] = {}
    seed_seq = np.random.SeedSequence(config.seed)
    app.state.sessions = sessions

    @app.get("/healthz")
    async def healthz():
        live = sum(1 for s in sessions.values() if not s.done)
        return {"status": "ok", "live_sessions": live,
                "layout": config.layout_name, "agent": config.agent}

    @app.websocket("/play")
    async def play(ws: WebSocket):
        await ws.accept()
        session: Optional[Session] = None
        try:
            raw = await ws.receive_text()
            try:
                msg = json.loads(raw)
            except ValueError as exc:
                raise ProtocolViolation(f"not JSON: {exc}") from exc
            if msg.get("type") != "join":
                raise ProtocolViolation("first message must be join")
            rejoin = msg.get("session_id")
            if rejoin and rejoin in sessions and not sessions[rejoin].done:
                session = sessions[rejoin]
                session.sockets.append(ws)
                await ws.send_text(json.dumps(session.session_start_message()))
            else:
                live = sum(1 for s in sessions.values() if not s.done)
                if live >= config.max_sessions:
                    raise SessionLimitExceeded(
                        f"at most {config.max_sessions} concurrent sessions"
                    )
                rng = np.random.default_rng(seed_seq.spawn(1)[0])
                session = Session(uuid.uuid4().hex, config, layout, agent,
                                  kitchen, rng)
                sessions[session.id] = session
                session.sockets.append(ws)
                await ws.send_text(json.dumps(session.session_start_message()))
                asyncio.get_running_loop().create_task(_ticker(session))
            while True:
                recv = asyncio.ensure_future(ws.receive_text())
                over = asyncio.ensure_future(session.finished.wait())
                await asyncio.wait({recv, over},
                                   return_when=asyncio.FIRST_COMPLETED)
                if session.finished.is_set() and not recv.done():
                    recv.cancel()
                    over.cancel()
                    break
                over.cancel()
                raw = recv.result()
                try:
                    msg = json.loads(raw)
                except ValueError as exc:
                    raise ProtocolViolation(f"not JSON: {exc}") from exc
                kind = msg.get("type")
                if kind == "input":
                    name = msg.get("action")
                    if name not in ACTION_WIRE:
                        raise ProtocolViolation(f"unknown action {name!r}")
                    session.pending = ACTION_WIRE[name]
                elif kind == "ping":
                    await ws.send_text(json.dumps({"type": "pong"}))
                else:
                    raise ProtocolViolation(f"unknown message type {kind!r}")
            try:
                await ws.close()
            except Exception:
                pass
        except WebSocketDisconnect:
            pass
        except (ProtocolViolation, SessionLimitExceeded) as exc:
            try:
                await ws.send_text(json.dumps({
                    "type": "error",
                    "code": type(exc).__name__,
                    "message": str(exc),
                }))
                await ws.close()
            except Exception:
                pass
        finally:
            if session is not None and ws in session.sockets:
                session.sockets.remove(ws)

    return app


def serve(config: ServerConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="warning")
