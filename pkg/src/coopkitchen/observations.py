"""Observation encoders: layered lossless grid, goal-layer augmentation,
egocentric crop, frame stacking, and the compact feature vector used for
behavioral cloning."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core.types import (
    Cell,
    DEFAULT_CONFIG,
    DIRECTION_DELTAS,
    GameState,
    HeldObject,
    KitchenConfig,
    Layout,
    Orientation,
    TileKind,
)
from .subtasks import adjacent_floor_cells, bfs_distances


class ShapeMismatch(Exception):
    pass


# Channel inventory. "ego" is the encoding's own player 0; the teammate is
# re-indexed so one encoder serves both seats.
CHANNELS = (
    "ego_pos",
    "mate_pos",
    "ego_orient_up",
    "ego_orient_down",
    "ego_orient_left",
    "ego_orient_right",
    "mate_orient_up",
    "mate_orient_down",
    "mate_orient_left",
    "mate_orient_right",
    "ego_held_onion",
    "ego_held_dish",
    "ego_held_soup",
    "mate_held_onion",
    "mate_held_dish",
    "mate_held_soup",
    "static_counter",
    "static_onion_dispenser",
    "static_dish_dispenser",
    "static_pot",
    "static_serving_window",
    "counter_onion",
    "counter_dish",
    "counter_soup",
    "pot_onions",
    "pot_timer",
    "tick",
    "score",
)
N_CHANNELS = len(CHANNELS)
CH = {name: i for i, name in enumerate(CHANNELS)}
GOAL_CHANNEL = "goal"
WALL_FILL_CHANNEL = CH["static_counter"]  # out-of-world reads as impassable

EGO_CROP = 7


@dataclass(frozen=True)
class ObservationTensor:
    channels: tuple[str, ...]
    data: np.ndarray  # int16 (C, H, W)
    ego_player: int

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]


def encode_lossless(
    state: GameState, layout: Layout, ego: int, config: KitchenConfig = DEFAULT_CONFIG
) -> ObservationTensor:
    """Layered grid encoding. Lossless: decode_lossless inverts it exactly."""
    h, w = layout.height, layout.width
    data = np.zeros((N_CHANNELS, h, w), dtype=np.int16)
    mate = 1 - ego
    for tag, p in (("ego", ego), ("mate", mate)):
        r, c = int(state.positions[p, 0]), int(state.positions[p, 1])
        data[CH[f"{tag}_pos"], r, c] = 1
        orient = Orientation(int(state.orientations[p])).name.lower()
        data[CH[f"{tag}_orient_{orient}"], r, c] = 1
        held = int(state.held[p])
        if held != int(HeldObject.NOTHING):
            name = HeldObject(held).name.lower()
            data[CH[f"{tag}_held_{name}"], r, c] = 1
    for kind in (
        TileKind.COUNTER,
        TileKind.ONION_DISPENSER,
        TileKind.DISH_DISPENSER,
        TileKind.POT,
        TileKind.SERVING_WINDOW,
    ):
        ch = CH[f"static_{kind.name.lower()}"]
        data[ch] = (layout.tiles == int(kind)).astype(np.int16)
    for obj in (HeldObject.ONION, HeldObject.DISH, HeldObject.SOUP):
        ch = CH[f"counter_{obj.name.lower()}"]
        data[ch] = (state.counters == int(obj)).astype(np.int16)
    for i, (r, c) in enumerate(layout.pot_cells):
        data[CH["pot_onions"], r, c] = int(state.pot_onions[i])
        data[CH["pot_timer"], r, c] = int(state.pot_timer[i])
    data[CH["tick"]] = state.tick
    data[CH["score"]] = state.score
    return ObservationTensor(channels=CHANNELS, data=data, ego_player=ego)


def decode_lossless(obs: ObservationTensor, layout: Layout) -> GameState:
    """Reconstruct the GameState from a lossless encoding."""
    data = obs.data
    ego = obs.ego_player
    positions = np.zeros((2, 2), dtype=np.int16)
    orientations = np.zeros(2, dtype=np.int8)
    held = np.zeros(2, dtype=np.int8)
    for tag, p in (("ego", ego), ("mate", 1 - ego)):
        rs, cs = np.nonzero(data[CH[f"{tag}_pos"]])
        r, c = int(rs[0]), int(cs[0])
        positions[p] = (r, c)
        for o in Orientation:
            if data[CH[f"{tag}_orient_{o.name.lower()}"], r, c]:
                orientations[p] = int(o)
        for obj in (HeldObject.ONION, HeldObject.DISH, HeldObject.SOUP):
            if data[CH[f"{tag}_held_{obj.name.lower()}"], r, c]:
                held[p] = int(obj)
    counters = np.zeros((layout.height, layout.width), dtype=np.int8)
    for obj in (HeldObject.ONION, HeldObject.DISH, HeldObject.SOUP):
        counters[data[CH[f"counter_{obj.name.lower()}"]] > 0] = int(obj)
    n_pots = len(layout.pot_cells)
    pot_onions = np.zeros(n_pots, dtype=np.int16)
    pot_timer = np.zeros(n_pots, dtype=np.int16)
    for i, (r, c) in enumerate(layout.pot_cells):
        pot_onions[i] = int(data[CH["pot_onions"], r, c])
        pot_timer[i] = int(data[CH["pot_timer"], r, c])
    return GameState(
        positions=positions,
        orientations=orientations,
        held=held,
        pot_onions=pot_onions,
        pot_timer=pot_timer,
        counters=counters,
        tick=int(data[CH["tick"], 0, 0]),
        score=int(data[CH["score"], 0, 0]),
    )


def attach_goal_layer(obs: ObservationTensor, goal: np.ndarray) -> ObservationTensor:
    """Append exactly one binary channel carrying the sub-task goal cells."""
    if goal.shape != obs.data.shape[1:]:
        raise ShapeMismatch(f"goal {goal.shape} vs obs {obs.data.shape[1:]}")
    data = np.concatenate([obs.data, goal[None].astype(np.int16)], axis=0)
    return ObservationTensor(
        channels=obs.channels + (GOAL_CHANNEL,), data=data, ego_player=obs.ego_player
    )


def egocentric_crop(
    obs: ObservationTensor, ego_position: Cell, size: int = EGO_CROP
) -> ObservationTensor:
    """size x size window centered on the ego player; cells outside the grid
    read as impassable (wall-fill on the counter static channel)."""
    c_dim, h, w = obs.data.shape
    half = size // 2
    out = np.zeros((c_dim, size, size), dtype=obs.data.dtype)
    out[WALL_FILL_CHANNEL] = 1
    r0 = ego_position[0] - half
    c0 = ego_position[1] - half
    src_r0, src_r1 = max(r0, 0), min(r0 + size, h)
    src_c0, src_c1 = max(c0, 0), min(c0 + size, w)
    if src_r0 < src_r1 and src_c0 < src_c1:
        out[:, src_r0 - r0:src_r1 - r0, src_c0 - c0:src_c1 - c0] = obs.data[
            :, src_r0:src_r1, src_c0:src_c1
        ]
    return ObservationTensor(channels=obs.channels, data=out, ego_player=obs.ego_player)


def frame_stack(history: Sequence[ObservationTensor]) -> np.ndarray:
    """Channel-concatenate the last k frames, newest last. Callers pad episode
    starts by repeating the first frame."""
    return np.concatenate([f.data for f in history], axis=0)


# Encoder configuration ------------------------------------------------------

@dataclass(frozen=True)
class EncoderConfig:
    """Self-describing observation pipeline spec, embedded in checkpoints."""

    kind: str = "lossless"  # "lossless" | "features"
    view: str = "full"  # "full" | "egocentric"
    crop_size: int = EGO_CROP
    goal_layer: bool = False
    stack: int = 1

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "view": self.view,
            "crop_size": self.crop_size,
            "goal_layer": self.goal_layer,
            "stack": self.stack,
        }

    @staticmethod
    def from_dict(d: dict) -> "EncoderConfig":
        return EncoderConfig(**d)

    def per_frame_channels(self) -> int:
        return N_CHANNELS + (1 if self.goal_layer else 0)

    def obs_dim(self, layout: Layout) -> int:
        if self.kind == "features":
            return feature_vector_dim(layout)
        if self.view == "egocentric":
            cells = self.crop_size * self.crop_size
        else:
            cells = layout.height * layout.width
        return self.per_frame_channels() * cells * self.stack


class ObservationPipeline:
    """Stateful encoder for rollouts: handles goal layers, cropping, and
    frame-stack history. reset() at episode boundaries."""

    def __init__(self, config: EncoderConfig, layout: Layout,
                 kitchen: KitchenConfig = DEFAULT_CONFIG):
        self.config = config
        self.layout = layout
        self.kitchen = kitchen
        self._history: list[ObservationTensor] = []

    def reset(self) -> None:
        self._history.clear()

    def _to_network_input(self, data: np.ndarray) -> np.ndarray:
        """float32 copy with the unbounded channels (tick, score, pot timer)
        rescaled to roughly [0, 1] so the MLP trunk is not fed values in the
        hundreds. The integer encoding itself stays exact for decoding."""
        arr = data.astype(np.float32)
        per = self.config.per_frame_channels()
        for frame in range(arr.shape[0] // per):
            base = frame * per
            arr[base + CH["tick"]] /= float(self.kitchen.horizon)
            arr[base + CH["score"]] /= float(self.kitchen.horizon)
            arr[base + CH["pot_timer"]] /= float(self.kitchen.cook_time)
        return arr.ravel()

    def encode(
        self, state: GameState, ego: int, goal: Optional[np.ndarray] = None
    ) -> np.ndarray:
        cfg = self.config
        if cfg.kind == "features":
            return encode_features(state, self.layout, ego, self.kitchen)
        obs = encode_lossless(state, self.layout, ego, self.kitchen)
        if cfg.goal_layer:
            if goal is None:
                goal = np.zeros(self.layout.tiles.shape, dtype=np.int8)
            obs = attach_goal_layer(obs, goal)
        if cfg.view == "egocentric":
            pos = (int(state.positions[ego, 0]), int(state.positions[ego, 1]))
            obs = egocentric_crop(obs, pos, cfg.crop_size)
        if cfg.stack <= 1:
            return self._to_network_input(obs.data)
        if not self._history:
            self._history = [obs] * cfg.stack
        else:
            self._history = self._history[1:] + [obs]
        return self._to_network_input(frame_stack(self._history))


# Feature vector for behavioral cloning --------------------------------------

_OFFSET_TARGETS = (
    "onion_dispenser",
    "dish_dispenser",
    "nonfull_pot",
    "ready_pot",
    "serving_window",
    "empty_counter",
)


def feature_vector_dim(layout: Layout) -> int:
    n_pots = len(layout.pot_cells)
    per_player = layout.height + layout.width + 4 + 4  # pos one-hots, orient, held
    return 2 * per_player + 3 * n_pots + 2 * len(_OFFSET_TARGETS)


def _offset_target_cells(
    state: GameState, layout: Layout, target: str, config: KitchenConfig
) -> list[Cell]:
    if target == "onion_dispenser":
        return list(layout.cells_of(TileKind.ONION_DISPENSER))
    if target == "dish_dispenser":
        return list(layout.cells_of(TileKind.DISH_DISPENSER))
    if target == "serving_window":
        return list(layout.cells_of(TileKind.SERVING_WINDOW))
    if target == "nonfull_pot":
        return [
            cell for i, cell in enumerate(layout.pot_cells)
            if state.pot_onions[i] < config.pot_capacity
        ]
    if target == "ready_pot":
        return [
            cell for i, cell in enumerate(layout.pot_cells)
            if state.pot_onions[i] == config.pot_capacity and state.pot_timer[i] == 0
        ]
    if target == "empty_counter":
        empty = (layout.tiles == int(TileKind.COUNTER)) & (state.counters == 0)
        rs, cs = np.nonzero(empty)
        return [(int(r), int(c)) for r, c in zip(rs, cs)]
    raise ValueError(target)


def nearest_feature_offset(
    state: GameState, layout: Layout, ego: int, target: str,
    config: KitchenConfig = DEFAULT_CONFIG,
) -> tuple[int, int]:
    """(drow, dcol) to the nearest qualifying feature tile by BFS walking
    distance to an adjacent floor cell; (0, 0) when none is reachable."""
    me = (int(state.positions[ego, 0]), int(state.positions[ego, 1]))
    dist = bfs_distances(layout, me, None)
    best = None
    best_d = None
    for cell in _offset_target_cells(state, layout, target, config):
        for adj in adjacent_floor_cells(layout, cell):
            d = dist[adj]
            if d >= 0 and (best_d is None or d < best_d):
                best_d = d
                best = cell
    if best is None:
        return (0, 0)
    dr = max(-layout.height, min(layout.height, best[0] - me[0]))
    dc = max(-layout.width, min(layout.width, best[1] - me[1]))
    return (dr, dc)


def encode_features(
    state: GameState, layout: Layout, ego: int, config: KitchenConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Compact hand-crafted feature vector (fixed dimension per layout)."""
    parts: list[np.ndarray] = []
    for p in (ego, 1 - ego):
        row = np.zeros(layout.height, dtype=np.float32)
        col = np.zeros(layout.width, dtype=np.float32)
        row[int(state.positions[p, 0])] = 1.0
        col[int(state.positions[p, 1])] = 1.0
        orient = np.zeros(4, dtype=np.float32)
        orient[int(state.orientations[p])] = 1.0
        held = np.zeros(4, dtype=np.float32)
        held[int(state.held[p])] = 1.0
        parts += [row, col, orient, held]
    pot_feats = np.zeros(3 * len(layout.pot_cells), dtype=np.float32)
    for i in range(len(layout.pot_cells)):
        onions = int(state.pot_onions[i])
        timer = int(state.pot_timer[i])
        ready = onions == config.pot_capacity and timer == 0
        pot_feats[3 * i:3 * i + 3] = (onions, timer, 1.0 if ready else 0.0)
    parts.append(pot_feats)
    offsets = np.zeros(2 * len(_OFFSET_TARGETS), dtype=np.float32)
    for i, target in enumerate(_OFFSET_TARGETS):
        dr, dc = nearest_feature_offset(state, layout, ego, target, config)
        offsets[2 * i:2 * i + 2] = (dr, dc)
    parts.append(offsets)
    return np.concatenate(parts)
