"""Deterministic replay logs: JSON lines, header then one joint action per line."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from .engine import step_inplace
from .types import (
    Action,
    DEFAULT_CONFIG,
    GameState,
    KitchenConfig,
    Layout,
    LogLengthExceedsHorizon,
    initial_state,
)

JointAction = tuple[Action, Action]


def replay(
    layout: Layout,
    seed: int,
    action_log: Sequence[JointAction],
    config: KitchenConfig = DEFAULT_CONFIG,
) -> GameState:
    """Re-simulate a joint-action log from the start state.

    The seed is carried for log bookkeeping only; the dynamics are
    deterministic and identical inputs give bit-identical final states.
    """
    if len(action_log) > config.horizon:
        raise LogLengthExceedsHorizon(
            f"log has {len(action_log)} steps, horizon is {config.horizon}"
        )
    state = initial_state(layout)
    for joint in action_log:
        step_inplace(state, joint, layout, config)
    return state


def write_replay_log(
    path: str | Path,
    layout_name: str,
    seed: int,
    actions: Iterable[JointAction],
    horizon: int = DEFAULT_CONFIG.horizon,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        f.write(json.dumps({"layout": layout_name, "seed": seed, "horizon": horizon}) + "\n")
        for a, b in actions:
            f.write(json.dumps([int(a), int(b)]) + "\n")


def read_replay_log(path: str | Path) -> tuple[dict, list[JointAction]]:
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0])
    actions = [
        (Action(a), Action(b)) for a, b in (json.loads(line) for line in lines[1:])
    ]
    return header, actions
