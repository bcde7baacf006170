"""Core domain types for the two-player cooperative kitchen gridworld."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

Cell = tuple[int, int]  # (row, col)


class TileKind(IntEnum):
    FLOOR = 0
    COUNTER = 1
    ONION_DISPENSER = 2
    DISH_DISPENSER = 3
    POT = 4
    SERVING_WINDOW = 5


class HeldObject(IntEnum):
    NOTHING = 0
    ONION = 1
    DISH = 2
    SOUP = 3


class Orientation(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    INTERACT = 4
    STAY = 5


N_ACTIONS = 6

# (drow, dcol) for Orientation / move Action values 0..3
DIRECTION_DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))


class EventKind(IntEnum):
    """The 11 concrete state deltas an Interact can cause."""

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


@dataclass(frozen=True)
class InteractEvent:
    kind: EventKind
    cell: Cell  # the tile the interact applied to

    def to_dict(self) -> dict:
        return {"kind": self.kind.name.lower(), "cell": list(self.cell)}


class KitchenError(Exception):
    """Base class for engine errors."""


class MalformedGrid(KitchenError):
    pass


class MissingFeature(KitchenError):
    pass


class BadStarts(KitchenError):
    pass


class OpenBoundary(KitchenError):
    pass


class InvalidSwap(KitchenError):
    pass


class InconsistentState(KitchenError):
    pass


class LogLengthExceedsHorizon(KitchenError):
    pass


@dataclass(frozen=True)
class KitchenConfig:
    """Tunable dynamics constants (not stated by the task rules themselves)."""

    pot_capacity: int = 3
    cook_time: int = 20
    soup_reward: int = 20
    horizon: int = 400


DEFAULT_CONFIG = KitchenConfig()


@dataclass(frozen=True)
class Layout:
    """Immutable static world: tile grid plus the two player start cells."""

    name: str
    tiles: np.ndarray  # int8 (h, w) of TileKind values
    starts: tuple[Cell, Cell]

    def __post_init__(self):
        self.tiles.setflags(write=False)

    @property
    def height(self) -> int:
        return self.tiles.shape[0]

    @property
    def width(self) -> int:
        return self.tiles.shape[1]

    @property
    def pot_cells(self) -> tuple[Cell, ...]:
        return self._cells_of(TileKind.POT)

    def _cells_of(self, kind: TileKind) -> tuple[Cell, ...]:
        rs, cs = np.nonzero(self.tiles == int(kind))
        return tuple((int(r), int(c)) for r, c in zip(rs, cs))

    def cells_of(self, kind: TileKind) -> tuple[Cell, ...]:
        return self._cells_of(kind)

    @property
    def pot_index(self) -> np.ndarray:
        """int16 (h, w) grid mapping pot cells to their index in pot_cells, -1 elsewhere."""
        idx = getattr(self, "_pot_index_cache", None)
        if idx is None:
            idx = np.full(self.tiles.shape, -1, dtype=np.int16)
            for i, (r, c) in enumerate(self.pot_cells):
                idx[r, c] = i
            idx.setflags(write=False)
            object.__setattr__(self, "_pot_index_cache", idx)
        return idx

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def is_floor(self, cell: Cell) -> bool:
        return self.tiles[cell] == int(TileKind.FLOOR)


@dataclass
class GameState:
    """Dynamic world snapshot. Treated as an immutable value: step() returns copies."""

    positions: np.ndarray  # int16 (2, 2): per player (row, col)
    orientations: np.ndarray  # int8 (2,)
    held: np.ndarray  # int8 (2,)
    pot_onions: np.ndarray  # int16 (n_pots,)
    pot_timer: np.ndarray  # int16 (n_pots,); >0 only while cooking
    counters: np.ndarray  # int8 (h, w): HeldObject value on each counter, 0 if none
    tick: int = 0
    score: int = 0

    def copy(self) -> "GameState":
        return GameState(
            positions=self.positions.copy(),
            orientations=self.orientations.copy(),
            held=self.held.copy(),
            pot_onions=self.pot_onions.copy(),
            pot_timer=self.pot_timer.copy(),
            counters=self.counters.copy(),
            tick=self.tick,
            score=self.score,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GameState):
            return NotImplemented
        return (
            self.tick == other.tick
            and self.score == other.score
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.orientations, other.orientations)
            and np.array_equal(self.held, other.held)
            and np.array_equal(self.pot_onions, other.pot_onions)
            and np.array_equal(self.pot_timer, other.pot_timer)
            and np.array_equal(self.counters, other.counters)
        )

    def state_hash(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        for arr in (
            self.positions,
            self.orientations,
            self.held,
            self.pot_onions,
            self.pot_timer,
            self.counters,
        ):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(self.tick.to_bytes(8, "little"))
        h.update(self.score.to_bytes(8, "little"))
        return h.hexdigest()

    # Convenience views matching the conceptual model ------------------------

    def player(self, i: int) -> "PlayerView":
        return PlayerView(
            position=(int(self.positions[i, 0]), int(self.positions[i, 1])),
            orientation=Orientation(int(self.orientations[i])),
            held=HeldObject(int(self.held[i])),
        )

    def pots(self, layout: Layout) -> dict[Cell, tuple[int, int]]:
        """cell -> (onions, cook_ticks_remaining)."""
        return {
            cell: (int(self.pot_onions[i]), int(self.pot_timer[i]))
            for i, cell in enumerate(layout.pot_cells)
        }

    def counter_objects(self) -> dict[Cell, HeldObject]:
        rs, cs = np.nonzero(self.counters)
        return {
            (int(r), int(c)): HeldObject(int(self.counters[r, c]))
            for r, c in zip(rs, cs)
        }

    def to_dict(self) -> dict:
        return {
            "positions": self.positions.tolist(),
            "orientations": self.orientations.tolist(),
            "held": self.held.tolist(),
            "pot_onions": self.pot_onions.tolist(),
            "pot_timer": self.pot_timer.tolist(),
            "counters": [
                [int(r), int(c), int(self.counters[r, c])]
                for r, c in zip(*np.nonzero(self.counters))
            ],
            "tick": self.tick,
            "score": self.score,
        }

    @staticmethod
    def from_dict(d: dict, layout: Layout) -> "GameState":
        counters = np.zeros((layout.height, layout.width), dtype=np.int8)
        for r, c, v in d["counters"]:
            counters[r, c] = v
        return GameState(
            positions=np.array(d["positions"], dtype=np.int16),
            orientations=np.array(d["orientations"], dtype=np.int8),
            held=np.array(d["held"], dtype=np.int8),
            pot_onions=np.array(d["pot_onions"], dtype=np.int16),
            pot_timer=np.array(d["pot_timer"], dtype=np.int16),
            counters=counters,
            tick=int(d["tick"]),
            score=int(d["score"]),
        )


@dataclass(frozen=True)
class PlayerView:
    position: Cell
    orientation: Orientation
    held: HeldObject


@dataclass(frozen=True)
class StepOutcome:
    next: GameState
    reward: int
    events: tuple[Optional[InteractEvent], Optional[InteractEvent]]


def initial_state(layout: Layout) -> GameState:
    """Standard start state: players on their start cells facing down, world empty."""
    return GameState(
        positions=np.array(layout.starts, dtype=np.int16),
        orientations=np.full(2, int(Orientation.DOWN), dtype=np.int8),
        held=np.zeros(2, dtype=np.int8),
        pot_onions=np.zeros(len(layout.pot_cells), dtype=np.int16),
        pot_timer=np.zeros(len(layout.pot_cells), dtype=np.int16),
        counters=np.zeros((layout.height, layout.width), dtype=np.int8),
        tick=0,
        score=0,
    )
