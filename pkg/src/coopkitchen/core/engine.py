"""Step/transition engine. Prefers the compiled kernel, falls back to pure Python.

Set COOPKITCHEN_FORCE_PY=1 to force the Python kernel (used by the benchmark
and the twin-kernel differential tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import _engine_py
from .types import (
    Action,
    Cell,
    DEFAULT_CONFIG,
    EventKind,
    GameState,
    InconsistentState,
    InteractEvent,
    KitchenConfig,
    Layout,
    StepOutcome,
    TileKind,
)

try:
    from . import _engine_cy  # compiled extension, built via setup.py
except ImportError:  # pragma: no cover - depends on build environment
    _engine_cy = None

_FORCE_PY = os.environ.get("COOPKITCHEN_FORCE_PY", "") not in ("", "0")
_kernel = _engine_py if (_engine_cy is None or _FORCE_PY) else _engine_cy

KERNEL_NAME = "python" if _kernel is _engine_py else "cython"


def kernel_module(name: str | None = None):
    """Return a kernel module by name ('python' / 'cython' / None=active)."""
    if name is None:
        return _kernel
    if name == "python":
        return _engine_py
    if name == "cython":
        if _engine_cy is None:
            raise RuntimeError("compiled kernel is not available")
        return _engine_cy
    raise ValueError(f"unknown kernel {name!r}")


def validate_state(state: GameState, layout: Layout) -> None:
    tiles = layout.tiles
    if state.counters.shape != tiles.shape:
        raise InconsistentState("counter grid shape does not match layout")
    if len(state.pot_onions) != len(layout.pot_cells):
        raise InconsistentState("pot array length does not match layout")
    p0 = (int(state.positions[0, 0]), int(state.positions[0, 1]))
    p1 = (int(state.positions[1, 0]), int(state.positions[1, 1]))
    if p0 == p1:
        raise InconsistentState("players share a cell")
    for cell in (p0, p1):
        if not layout.in_bounds(cell) or not layout.is_floor(cell):
            raise InconsistentState(f"player cell {cell} is not floor")
    occupied = state.counters != 0
    if (occupied & (tiles != int(TileKind.COUNTER))).any():
        raise InconsistentState("object resting on a non-counter tile")


def step(
    state: GameState,
    joint: tuple[Action, Action],
    layout: Layout,
    config: KitchenConfig = DEFAULT_CONFIG,
    validate: bool = False,
) -> StepOutcome:
    """Advance one tick. Pure: the input state is never mutated."""
    if validate:
        validate_state(state, layout)
    nxt = state.copy()
    reward, raw_events = _kernel.step_kernel(
        layout.tiles,
        layout.pot_index,
        nxt.positions,
        nxt.orientations,
        nxt.held,
        nxt.pot_onions,
        nxt.pot_timer,
        nxt.counters,
        int(joint[0]),
        int(joint[1]),
        config.pot_capacity,
        config.cook_time,
        config.soup_reward,
    )
    nxt.tick += 1
    nxt.score += reward
    events = tuple(
        InteractEvent(EventKind(kind), (tr, tc)) if kind >= 0 else None
        for kind, tr, tc in raw_events
    )
    return StepOutcome(next=nxt, reward=reward, events=events)


def step_inplace(
    state: GameState,
    joint: tuple[Action, Action],
    layout: Layout,
    config: KitchenConfig = DEFAULT_CONFIG,
) -> tuple[int, list[tuple[int, int, int]]]:
    """Hot-loop variant of step: mutates `state`, returns (reward, raw events).

    Raw events are (kind, target_row, target_col) with kind == -1 for none.
    Rollout code owns the state and avoids the per-step copy of step().
    """
    reward, raw_events = _kernel.step_kernel(
        layout.tiles,
        layout.pot_index,
        state.positions,
        state.orientations,
        state.held,
        state.pot_onions,
        state.pot_timer,
        state.counters,
        int(joint[0]),
        int(joint[1]),
        config.pot_capacity,
        config.cook_time,
        config.soup_reward,
    )
    state.tick += 1
    state.score += reward
    return reward, raw_events


def legal_interact_effect(
    state: GameState,
    player_index: int,
    layout: Layout,
    config: KitchenConfig = DEFAULT_CONFIG,
) -> InteractEvent | None:
    """Predict what Interact would do for this player right now (no mutation)."""
    kind, tr, tc = _kernel.interact_effect(
        layout.tiles,
        layout.pot_index,
        state.counters,
        state.pot_onions,
        state.pot_timer,
        int(state.positions[player_index, 0]),
        int(state.positions[player_index, 1]),
        int(state.orientations[player_index]),
        int(state.held[player_index]),
        config.pot_capacity,
    )
    if kind < 0:
        return None
    return InteractEvent(EventKind(kind), (tr, tc))
