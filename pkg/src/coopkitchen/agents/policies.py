"""Policy abstractions plus the non-neural agents (random, scripted greedy)."""

from __future__ import annotations

import numpy as np

from ..core.types import (
    Action,
    Cell,
    DEFAULT_CONFIG,
    DIRECTION_DELTAS,
    GameState,
    HeldObject,
    KitchenConfig,
    Layout,
    N_ACTIONS,
)
from ..subtasks import (
    SubTask,
    adjacent_floor_cells,
    bfs_distances,
    goal_cells,
)


class EncoderMismatch(Exception):
    pass


class Policy:
    """A policy produces one primitive action per tick for one seat.

    session() returns a per-episode actor so stateful encoders (frame
    stacking) start fresh each episode. mode is "stochastic" or "greedy";
    greedy breaks ties by lowest action index.
    """

    mode: str = "stochastic"

    def session(self, layout: Layout, ego: int) -> "Actor":
        raise NotImplementedError


class Actor:
    def reset(self) -> None:
        pass

    def act(self, state: GameState, rng: np.random.Generator) -> Action:
        raise NotImplementedError


def act(
    policy: Policy,
    state: GameState,
    layout: Layout,
    ego: int,
    rng: np.random.Generator,
) -> Action:
    """One-shot convenience query (fresh session per call)."""
    return policy.session(layout, ego).act(state, rng)


class RandomPolicy(Policy):
    """Uniform over the 6 primitive actions."""

    def session(self, layout: Layout, ego: int) -> Actor:
        return _RandomActor()


class _RandomActor(Actor):
    def act(self, state: GameState, rng: np.random.Generator) -> Action:
        return Action(int(rng.integers(N_ACTIONS)))


class StayPolicy(Policy):
    def session(self, layout: Layout, ego: int) -> Actor:
        return _StayActor()


class _StayActor(Actor):
    def act(self, state: GameState, rng: np.random.Generator) -> Action:
        return Action.STAY


# Scripted greedy ------------------------------------------------------------

_ORIENT_FOR_DELTA = {d: i for i, d in enumerate(DIRECTION_DELTAS)}


def _step_toward(
    layout: Layout, state: GameState, ego: int, targets: list[Cell],
    ignore_teammate: bool = False, out_goal: list[Cell] | None = None,
) -> Action | None:
    """Deterministic move toward the nearest target feature cell (teammate
    treated as an obstacle); Interact when adjacent and facing. None = no path.

    With ignore_teammate, paths assume the teammate will vacate; actually
    stepping into their cell still fails in the engine, which just turns the
    player in place until the cell frees up.
    """
    me = (int(state.positions[ego, 0]), int(state.positions[ego, 1]))
    other = 1 - ego
    teammate = None if ignore_teammate else (
        int(state.positions[other, 0]), int(state.positions[other, 1])
    )
    dist = bfs_distances(layout, me, teammate)

    # Already adjacent to a target: face it, then interact.
    for cell in targets:
        delta = (cell[0] - me[0], cell[1] - me[1])
        if delta in _ORIENT_FOR_DELTA:
            facing = int(state.orientations[ego]) == _ORIENT_FOR_DELTA[delta]
            return Action.INTERACT if facing else Action(_ORIENT_FOR_DELTA[delta])

    best: Cell | None = None
    best_goal: Cell | None = None
    best_d = None
    for cell in targets:
        for adj in adjacent_floor_cells(layout, cell):
            if adj == teammate:
                continue
            d = dist[adj]
            if d >= 0 and (best_d is None or d < best_d):
                best_d = d
                best = adj
                best_goal = cell
    if best is None:
        return None
    if out_goal is not None:
        out_goal.append(best_goal)
    back = bfs_distances(layout, best, teammate)
    for a in (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT):
        nxt = (me[0] + DIRECTION_DELTAS[a][0], me[1] + DIRECTION_DELTAS[a][1])
        if (
            layout.in_bounds(nxt)
            and layout.is_floor(nxt)
            and nxt != teammate
            and back[nxt] >= 0
            and back[nxt] < back[me]
        ):
            return a
    return Action.STAY


class ScriptedGreedyPolicy(Policy):
    """Deterministic rule policy used as a teammate/oracle in desk-scale tests.

    Sub-task priority: serve soup > collect soup > fill pots > fetch dish
    (when a soup is pending) > fetch onion; falls back to Stay when blocked.
    """

    mode = "greedy"

    def __init__(self, config: KitchenConfig = DEFAULT_CONFIG):
        self.config = config

    def session(self, layout: Layout, ego: int) -> Actor:
        return _GreedyActor(self, layout, ego)


class _GreedyActor(Actor):
    def __init__(self, policy: ScriptedGreedyPolicy, layout: Layout, ego: int):
        self.config = policy.config
        self.layout = layout
        self.ego = ego
        self._prev_pos: Cell | None = None
        self._prev_action: Action = Action.STAY
        self._committed: tuple[SubTask, Cell] | None = None

    def reset(self) -> None:
        self._prev_pos = None
        self._prev_action = Action.STAY
        self._committed = None

    def act(self, state: GameState, rng: np.random.Generator) -> Action:
        me = (int(state.positions[self.ego, 0]), int(state.positions[self.ego, 1]))
        blocked = (
            self._prev_action in (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT)
            and self._prev_pos == me
        )
        self._prev_pos = me
        # Symmetric contention breaker: the second seat yields one tick after
        # a blocked move so the first seat can take the contested cell.
        if blocked and self.ego == 1:
            self._prev_action = Action.STAY
            return Action.STAY
        action = self._plan(state)
        self._prev_action = action
        return action

    def _plan(self, state: GameState) -> Action:
        task = self._choose_task(state)
        if task is None:
            self._committed = None
            return Action.STAY
        targets = goal_cells(state, task, self.layout, self.config)
        if not targets:
            self._committed = None
            return Action.STAY
        # Stick with the previously chosen goal cell while it stays valid, so
        # two re-planning agents do not endlessly chase flip-flopping targets.
        if self._committed is not None:
            c_task, c_cell = self._committed
            if c_task == task and c_cell in targets:
                targets = [c_cell]
            else:
                self._committed = None
        chosen: list[Cell] = []
        move = _step_toward(self.layout, state, self.ego, targets, out_goal=chosen)
        if move is None:
            move = _step_toward(self.layout, state, self.ego, targets,
                                ignore_teammate=True, out_goal=chosen)
        if move is None and self._committed is not None:
            # committed goal became unreachable; retry unconstrained next tick
            self._committed = None
            return self._plan(state)
        if chosen:
            self._committed = (task, chosen[0])
        return Action.STAY if move is None else move

    def _choose_task(self, state: GameState) -> SubTask | None:
        cfg = self.config
        held = HeldObject(int(state.held[self.ego]))
        full_pots = int((state.pot_onions == cfg.pot_capacity).sum())
        nonfull_pots = int((state.pot_onions < cfg.pot_capacity).sum())
        if held == HeldObject.SOUP:
            return SubTask.SERVE_SOUP
        if held == HeldObject.DISH:
            if full_pots > 0:
                # waits at the pot while it cooks; GET goals include cooking pots
                return SubTask.GET_SOUP_FROM_POT
            return SubTask.PLACE_DISH_ON_COUNTER
        if held == HeldObject.ONION:
            if nonfull_pots > 0:
                return SubTask.PLACE_ONION_IN_POT
            return SubTask.PLACE_ONION_ON_COUNTER
        # Empty-handed: fetch a dish for a pending soup, else an onion.
        dishes_in_hand = int((state.held == int(HeldObject.DISH)).sum())
        soups_in_hand = int((state.held == int(HeldObject.SOUP)).sum())
        if full_pots > dishes_in_hand + soups_in_hand:
            return SubTask.PICKUP_DISH_FROM_DISPENSER
        if nonfull_pots > 0:
            return SubTask.PICKUP_ONION_FROM_DISPENSER
        return None
