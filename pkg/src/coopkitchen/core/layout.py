"""Layout parsing, validation, perturbation, and file I/O.

ASCII legend: X=Counter, O=OnionDispenser, D=DishDispenser, P=Pot,
S=ServingWindow, space=Floor, 1/2=player start cells (on Floor).
"""

from __future__ import annotations

import json
from collections import deque
from importlib import resources
from pathlib import Path

import numpy as np

from .types import (
    BadStarts,
    Cell,
    InvalidSwap,
    Layout,
    MalformedGrid,
    MissingFeature,
    OpenBoundary,
    TileKind,
)

_LEGEND = {
    " ": TileKind.FLOOR,
    "X": TileKind.COUNTER,
    "O": TileKind.ONION_DISPENSER,
    "D": TileKind.DISH_DISPENSER,
    "P": TileKind.POT,
    "S": TileKind.SERVING_WINDOW,
}
_REVERSE_LEGEND = {v: k for k, v in _LEGEND.items()}

CANONICAL_LAYOUT_NAMES = (
    "cramped_room",
    "asymmetric_advantages",
    "coordination_ring",
    "counter_circuit",
    "forced_coordination",
)

_REQUIRED_FEATURES = (
    TileKind.ONION_DISPENSER,
    TileKind.DISH_DISPENSER,
    TileKind.POT,
    TileKind.SERVING_WINDOW,
)


def parse_layout(text: str, name: str = "unnamed") -> Layout:
    rows = text.splitlines()
    while rows and rows[-1] == "":
        rows.pop()
    if not rows:
        raise MalformedGrid("empty grid")
    width = len(rows[0])
    if width == 0 or any(len(r) != width for r in rows):
        raise MalformedGrid("grid rows are ragged")
    height = len(rows)

    tiles = np.zeros((height, width), dtype=np.int8)
    starts: dict[str, Cell] = {}
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            if ch in ("1", "2"):
                if ch in starts:
                    raise BadStarts(f"duplicate start marker {ch}")
                starts[ch] = (r, c)
                tiles[r, c] = int(TileKind.FLOOR)
            elif ch in _LEGEND:
                tiles[r, c] = int(_LEGEND[ch])
            else:
                raise MalformedGrid(f"unknown character {ch!r} at ({r},{c})")

    if set(starts) != {"1", "2"}:
        raise BadStarts(f"expected start markers 1 and 2, got {sorted(starts)}")
    layout = Layout(name=name, tiles=tiles, starts=(starts["1"], starts["2"]))
    validate_layout(layout)
    return layout


def validate_layout(layout: Layout) -> None:
    tiles = layout.tiles
    for kind in _REQUIRED_FEATURES:
        if not (tiles == int(kind)).any():
            raise MissingFeature(f"layout has no {kind.name}")
    a, b = layout.starts
    if a == b:
        raise BadStarts("start cells coincide")
    for cell in (a, b):
        if not layout.in_bounds(cell) or not layout.is_floor(cell):
            raise BadStarts(f"start {cell} is not a floor cell")
    boundary = np.concatenate([tiles[0], tiles[-1], tiles[:, 0], tiles[:, -1]])
    if (boundary == int(TileKind.FLOOR)).any():
        raise OpenBoundary("boundary contains floor cells")


def render_layout(layout: Layout) -> str:
    rows = []
    for r in range(layout.height):
        row = [
            _REVERSE_LEGEND[TileKind(int(layout.tiles[r, c]))]
            for c in range(layout.width)
        ]
        rows.append("".join(row))
    for i, (r, c) in enumerate(layout.starts):
        rows[r] = rows[r][:c] + str(i + 1) + rows[r][c + 1:]
    return "\n".join(rows) + "\n"


_ORIENT_GLYPHS = ("^", "v", "<", ">")
_OBJECT_GLYPHS = {1: "o", 2: "d", 3: "s"}  # onion, dish, soup


def render_state(state, layout: Layout) -> str:
    """ASCII board: players drawn as their facing arrow (uppercase letter
    O/D/S after the arrow would be unreadable, so held objects show in the
    status line), counter objects as o/d/s, pots as the onion count or *
    when ready."""
    from .types import DEFAULT_CONFIG, HeldObject, Orientation

    grid = [
        [_REVERSE_LEGEND[TileKind(int(layout.tiles[r, c]))]
         for c in range(layout.width)]
        for r in range(layout.height)
    ]
    for (r, c), obj in state.counter_objects().items():
        grid[r][c] = _OBJECT_GLYPHS[int(obj)]
    for i, (r, c) in enumerate(layout.pot_cells):
        onions = int(state.pot_onions[i])
        timer = int(state.pot_timer[i])
        if onions >= DEFAULT_CONFIG.pot_capacity and timer == 0:
            grid[r][c] = "*"
        elif onions:
            grid[r][c] = str(onions)
    held_names = []
    for p in range(2):
        r, c = int(state.positions[p, 0]), int(state.positions[p, 1])
        grid[r][c] = _ORIENT_GLYPHS[int(state.orientations[p])]
        held = HeldObject(int(state.held[p]))
        held_names.append(held.name.lower())
    board = "\n".join("".join(row) for row in grid)
    status = (f"tick {state.tick}  score {state.score}  "
              f"p1 holds {held_names[0]}  p2 holds {held_names[1]}")
    return board + "\n" + status + "\n"


def reachable_floor(layout: Layout, start: Cell, blocked: Cell | None = None) -> set[Cell]:
    """Floor cells reachable from `start` by 4-connected moves, optionally
    treating one extra cell as blocked."""
    if not layout.is_floor(start) or start == blocked:
        return set()
    seen = {start}
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nxt = (r + dr, c + dc)
            if nxt in seen or nxt == blocked:
                continue
            if layout.in_bounds(nxt) and layout.is_floor(nxt):
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _features_reachable(layout: Layout) -> bool:
    """Every feature tile must touch a floor cell reachable from both starts."""
    reach = [reachable_floor(layout, s) for s in layout.starts]
    feature_kinds = set(int(k) for k in _REQUIRED_FEATURES)
    for r in range(layout.height):
        for c in range(layout.width):
            if int(layout.tiles[r, c]) not in feature_kinds:
                continue
            ok = [False, False]
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                adj = (r + dr, c + dc)
                for i in range(2):
                    if adj in reach[i]:
                        ok[i] = True
            if not (ok[0] and ok[1]):
                return False
    return True


def swap_tiles(layout: Layout, a: Cell, b: Cell) -> Layout:
    """Exchange the tile kinds at two cells; used for layout perturbation."""
    if a == b:
        raise InvalidSwap("cells must differ")
    for cell in (a, b):
        if not layout.in_bounds(cell):
            raise InvalidSwap(f"cell {cell} out of bounds")
        if cell in layout.starts:
            raise InvalidSwap(f"cell {cell} is a player start")
    tiles = layout.tiles.copy()
    tiles[a], tiles[b] = int(layout.tiles[b]), int(layout.tiles[a])
    swapped = Layout(name=layout.name + "_modified", tiles=tiles, starts=layout.starts)
    try:
        validate_layout(swapped)
    except Exception as exc:
        raise InvalidSwap(str(exc)) from exc
    if not _features_reachable(swapped):
        raise InvalidSwap("swap leaves a feature tile unreachable from a start")
    return swapped


# File I/O -------------------------------------------------------------------

def load_layout_file(path: str | Path) -> Layout:
    """Load `<name>.layout`, honoring the `<name>.meta.json` sidecar if present."""
    path = Path(path)
    name = path.stem
    meta_path = path.with_suffix("").with_suffix(".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        name = meta.get("name", name)
    return parse_layout(path.read_text(), name=name)


def load_layout_meta(path: str | Path) -> dict:
    path = Path(path)
    meta_path = path.with_suffix("").with_suffix(".meta.json")
    if meta_path.exists():
        return json.loads(meta_path.read_text())
    return {}


def save_layout_file(layout: Layout, directory: str | Path, meta: dict | None = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{layout.name}.layout"
    path.write_text(render_layout(layout))
    full_meta = {"name": layout.name}
    if meta:
        full_meta.update(meta)
    (directory / f"{layout.name}.meta.json").write_text(json.dumps(full_meta, indent=2))
    return path


def _bundled_dir():
    return resources.files("coopkitchen") / "layouts"


def load_bundled_layout(name: str) -> Layout:
    """Load one of the layouts shipped with the package."""
    text = (_bundled_dir() / f"{name}.layout").read_text()
    return parse_layout(text, name=name)


def bundled_layout_meta(name: str) -> dict:
    return json.loads((_bundled_dir() / f"{name}.meta.json").read_text())


def load_modified_layout(name: str) -> Layout:
    """Apply the bundled perturbation manifest (two swapped cells) to a layout."""
    meta = bundled_layout_meta(name)
    a, b = meta["perturbation"]["swap"]
    return swap_tiles(load_bundled_layout(name), tuple(a), tuple(b))


def canonical_layouts() -> dict[str, Layout]:
    return {name: load_bundled_layout(name) for name in CANONICAL_LAYOUT_NAMES}
