"""The 12 sub-task taxonomy: classification, feasibility masking, goal cells.

Sub-tasks are delimited by the Interact action: each concrete sub-task is one
of the 11 state deltas an Interact can cause, plus Unknown (no goal cells,
always feasible).
"""

from __future__ import annotations

from collections import deque
from enum import IntEnum
from typing import Optional

import numpy as np

from .core.types import (
    Cell,
    DEFAULT_CONFIG,
    DIRECTION_DELTAS,
    EventKind,
    GameState,
    HeldObject,
    InteractEvent,
    KitchenConfig,
    Layout,
    StepOutcome,
    TileKind,
)


class SubTask(IntEnum):
    PICKUP_ONION_FROM_DISPENSER = 0
    PICKUP_ONION_FROM_COUNTER = 1
    PICKUP_DISH_FROM_DISPENSER = 2
    PICKUP_DISH_FROM_COUNTER = 3
    PLACE_ONION_IN_POT = 4
    PLACE_ONION_ON_COUNTER = 5
    GET_SOUP_FROM_POT = 6
    PLACE_DISH_ON_COUNTER = 7
    PICKUP_SOUP_FROM_COUNTER = 8
    PLACE_SOUP_ON_COUNTER = 9
    SERVE_SOUP = 10
    UNKNOWN = 11

    @property
    def wire_name(self) -> str:
        return self.name.lower()

    @staticmethod
    def from_wire(name: str) -> "SubTask":
        return SubTask[name.upper()]


N_SUBTASKS = 12
CONCRETE_SUBTASKS = tuple(t for t in SubTask if t != SubTask.UNKNOWN)

# Held-object precondition per concrete sub-task.
_REQUIRED_HELD = {
    SubTask.PICKUP_ONION_FROM_DISPENSER: HeldObject.NOTHING,
    SubTask.PICKUP_ONION_FROM_COUNTER: HeldObject.NOTHING,
    SubTask.PICKUP_DISH_FROM_DISPENSER: HeldObject.NOTHING,
    SubTask.PICKUP_DISH_FROM_COUNTER: HeldObject.NOTHING,
    SubTask.PLACE_ONION_IN_POT: HeldObject.ONION,
    SubTask.PLACE_ONION_ON_COUNTER: HeldObject.ONION,
    SubTask.GET_SOUP_FROM_POT: HeldObject.DISH,
    SubTask.PLACE_DISH_ON_COUNTER: HeldObject.DISH,
    SubTask.PICKUP_SOUP_FROM_COUNTER: HeldObject.NOTHING,
    SubTask.PLACE_SOUP_ON_COUNTER: HeldObject.SOUP,
    SubTask.SERVE_SOUP: HeldObject.SOUP,
}


def classify_event(event: InteractEvent) -> SubTask:
    """Bijective mapping between the 11 interact effects and concrete sub-tasks."""
    return SubTask(int(event.kind))


def subtask_event_kind(task: SubTask) -> EventKind:
    if task == SubTask.UNKNOWN:
        raise ValueError("Unknown has no interact event")
    return EventKind(int(task))


class SubTaskMask:
    """Bitset over the 12 sub-tasks. Unknown is always set."""

    __slots__ = ("bits",)

    def __init__(self, bits: int = 1 << SubTask.UNKNOWN):
        self.bits = bits | (1 << SubTask.UNKNOWN)

    def set(self, task: SubTask) -> None:
        self.bits |= 1 << task

    def __contains__(self, task: SubTask) -> bool:
        return bool(self.bits >> task & 1)

    def tasks(self) -> list[SubTask]:
        return [t for t in SubTask if t in self]

    def concrete_tasks(self) -> list[SubTask]:
        return [t for t in CONCRETE_SUBTASKS if t in self]

    def as_array(self) -> np.ndarray:
        return np.array([1 if t in self else 0 for t in SubTask], dtype=np.int8)

    def __eq__(self, other) -> bool:
        return isinstance(other, SubTaskMask) and self.bits == other.bits

    def __repr__(self) -> str:
        return f"SubTaskMask({[t.wire_name for t in self.tasks()]})"


def goal_cells(
    state: GameState,
    sub_task: SubTask,
    layout: Layout,
    config: KitchenConfig = DEFAULT_CONFIG,
    include_cooking_pots: bool = True,
) -> list[Cell]:
    """Cells satisfying the sub-task's target predicate (ignores feasibility)."""
    tiles = layout.tiles
    if sub_task == SubTask.UNKNOWN:
        return []
    if sub_task == SubTask.PICKUP_ONION_FROM_DISPENSER:
        return layout.cells_of(TileKind.ONION_DISPENSER)
    if sub_task == SubTask.PICKUP_DISH_FROM_DISPENSER:
        return layout.cells_of(TileKind.DISH_DISPENSER)
    if sub_task == SubTask.SERVE_SOUP:
        return layout.cells_of(TileKind.SERVING_WINDOW)
    if sub_task in (
        SubTask.PICKUP_ONION_FROM_COUNTER,
        SubTask.PICKUP_DISH_FROM_COUNTER,
        SubTask.PICKUP_SOUP_FROM_COUNTER,
    ):
        want = {
            SubTask.PICKUP_ONION_FROM_COUNTER: HeldObject.ONION,
            SubTask.PICKUP_DISH_FROM_COUNTER: HeldObject.DISH,
            SubTask.PICKUP_SOUP_FROM_COUNTER: HeldObject.SOUP,
        }[sub_task]
        rs, cs = np.nonzero(state.counters == int(want))
        return [(int(r), int(c)) for r, c in zip(rs, cs)]
    if sub_task in (
        SubTask.PLACE_ONION_ON_COUNTER,
        SubTask.PLACE_DISH_ON_COUNTER,
        SubTask.PLACE_SOUP_ON_COUNTER,
    ):
        empty = (tiles == int(TileKind.COUNTER)) & (state.counters == 0)
        rs, cs = np.nonzero(empty)
        return [(int(r), int(c)) for r, c in zip(rs, cs)]
    if sub_task == SubTask.PLACE_ONION_IN_POT:
        return [
            cell
            for i, cell in enumerate(layout.pot_cells)
            if state.pot_onions[i] < config.pot_capacity
        ]
    if sub_task == SubTask.GET_SOUP_FROM_POT:
        out = []
        for i, cell in enumerate(layout.pot_cells):
            full = state.pot_onions[i] == config.pot_capacity
            ready = full and state.pot_timer[i] == 0
            if ready or (include_cooking_pots and full):
                out.append(cell)
        return out
    raise ValueError(sub_task)


def reachable_from(
    layout: Layout, start: Cell, blocked: Optional[Cell]
) -> np.ndarray:
    """Boolean grid of floor cells reachable from `start` (inclusive), treating
    `blocked` as an obstacle. BFS also records distances; see bfs_distances."""
    return bfs_distances(layout, start, blocked) >= 0


def bfs_distances(layout: Layout, start: Cell, blocked: Optional[Cell]) -> np.ndarray:
    """int grid of BFS step counts from `start` over floor cells; -1 unreachable."""
    dist = np.full(layout.tiles.shape, -1, dtype=np.int32)
    if not layout.is_floor(start):
        return dist
    dist[start] = 0
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        for dr, dc in DIRECTION_DELTAS:
            nxt = (r + dr, c + dc)
            if not layout.in_bounds(nxt) or nxt == blocked:
                continue
            if dist[nxt] < 0 and layout.is_floor(nxt):
                dist[nxt] = dist[r, c] + 1
                queue.append(nxt)
    return dist


def adjacent_floor_cells(layout: Layout, cell: Cell) -> list[Cell]:
    out = []
    for dr, dc in DIRECTION_DELTAS:
        adj = (cell[0] + dr, cell[1] + dc)
        if layout.in_bounds(adj) and layout.is_floor(adj):
            out.append(adj)
    return out


def _cell_reachable_adjacent(
    layout: Layout, reach: np.ndarray, target: Cell, teammate: Optional[Cell]
) -> bool:
    for adj in adjacent_floor_cells(layout, target):
        if adj != teammate and reach[adj]:
            return True
    return False


def feasible_mask(
    state: GameState,
    player_index: int,
    layout: Layout,
    config: KitchenConfig = DEFAULT_CONFIG,
    use_reachability: bool = True,
    include_cooking_pots: bool = True,
) -> SubTaskMask:
    """Which sub-tasks the player could currently complete.

    A concrete sub-task is feasible iff the held-object precondition holds,
    at least one goal cell exists, and (when use_reachability) some goal cell
    is adjacent to a floor cell the player can reach with the teammate's cell
    treated as a static obstacle.
    """
    held = HeldObject(int(state.held[player_index]))
    me = (int(state.positions[player_index, 0]), int(state.positions[player_index, 1]))
    other = 1 - player_index
    teammate = (int(state.positions[other, 0]), int(state.positions[other, 1]))

    mask = SubTaskMask()
    reach = None
    for task in CONCRETE_SUBTASKS:
        if _REQUIRED_HELD[task] != held:
            continue
        cells = goal_cells(state, task, layout, config, include_cooking_pots)
        if not cells:
            continue
        if use_reachability:
            if reach is None:
                reach = reachable_from(layout, me, teammate)
            if not any(
                _cell_reachable_adjacent(layout, reach, cell, teammate)
                for cell in cells
            ):
                continue
        mask.set(task)
    return mask


def goal_layer(
    state: GameState,
    player_index: int,
    sub_task: SubTask,
    layout: Layout,
    config: KitchenConfig = DEFAULT_CONFIG,
    use_reachability: bool = True,
    include_cooking_pots: bool = True,
) -> np.ndarray:
    """Binary grid marking the sub-task's target cells; all-zero for Unknown
    or when the sub-task is currently infeasible for this player."""
    layer = np.zeros(layout.tiles.shape, dtype=np.int8)
    if sub_task == SubTask.UNKNOWN:
        return layer
    mask = feasible_mask(
        state, player_index, layout, config, use_reachability, include_cooking_pots
    )
    if sub_task not in mask:
        return layer
    for cell in goal_cells(state, sub_task, layout, config, include_cooking_pots):
        layer[cell] = 1
    return layer


class Completion(IntEnum):
    NO_INTERACT = 0
    COMPLETED = 1
    WRONG_INTERACT = 2


def completion_check(
    prev: GameState, outcome: StepOutcome, player_index: int, assigned: SubTask
) -> Completion:
    event = outcome.events[player_index]
    if event is None:
        return Completion.NO_INTERACT
    if classify_event(event) == assigned:
        return Completion.COMPLETED
    return Completion.WRONG_INTERACT
