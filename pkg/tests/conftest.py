import numpy as np
import pytest

from coopkitchen.core.layout import canonical_layouts, load_bundled_layout
from coopkitchen.core.types import Action, initial_state


@pytest.fixture(scope="session")
def layouts():
    return canonical_layouts()


@pytest.fixture
def cramped():
    return load_bundled_layout("cramped_room")


def random_walk_states(layout, n, seed=0, burn_max=200):
    """States reached by random play from the start state: every state in the
    returned list is reachable, which matters for oracle comparisons."""
    from coopkitchen.core.engine import step_inplace

    rng = np.random.default_rng(seed)
    out = []
    state = initial_state(layout)
    while len(out) < n:
        for _ in range(int(rng.integers(1, 12))):
            joint = (Action(int(rng.integers(6))), Action(int(rng.integers(6))))
            step_inplace(state, joint, layout)
            if state.tick >= 390:
                state = initial_state(layout)
        out.append(state.copy())
    return out
