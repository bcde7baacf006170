from .types import (
    Action,
    Cell,
    DEFAULT_CONFIG,
    EventKind,
    GameState,
    HeldObject,
    InconsistentState,
    InteractEvent,
    InvalidSwap,
    KitchenConfig,
    KitchenError,
    Layout,
    LogLengthExceedsHorizon,
    MalformedGrid,
    MissingFeature,
    BadStarts,
    OpenBoundary,
    Orientation,
    PlayerView,
    StepOutcome,
    TileKind,
    N_ACTIONS,
    DIRECTION_DELTAS,
    initial_state,
)
from .engine import KERNEL_NAME, kernel_module, legal_interact_effect, step, step_inplace, validate_state
from .layout import (
    CANONICAL_LAYOUT_NAMES,
    bundled_layout_meta,
    canonical_layouts,
    load_bundled_layout,
    load_layout_file,
    load_layout_meta,
    load_modified_layout,
    parse_layout,
    reachable_floor,
    render_layout,
    save_layout_file,
    swap_tiles,
    validate_layout,
)
from .replay import read_replay_log, replay, write_replay_log
