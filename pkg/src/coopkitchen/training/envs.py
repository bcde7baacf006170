"""Training environments: flat paired/self-play, the sub-task executor env
(short goal-conditioned episodes), and the sub-task selector env."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch

from ..agents.neural import ActorCriticNet, masked_log_probs
from ..agents.policies import Actor, Policy
from ..core.engine import step
from ..core.types import (
    Action,
    DEFAULT_CONFIG,
    GameState,
    KitchenConfig,
    Layout,
    initial_state,
)
from ..observations import EncoderConfig, ObservationPipeline
from ..subtasks import (
    CONCRETE_SUBTASKS,
    Completion,
    N_SUBTASKS,
    SubTask,
    SubTaskMask,
    adjacent_floor_cells,
    bfs_distances,
    completion_check,
    feasible_mask,
    goal_cells,
    goal_layer,
)
from .ppo import RolloutEnv


class NoFeasibleSubTask(Exception):
    pass


class MaskedActionChosen(Exception):
    pass


class SubTaskUsageCounter:
    """Per-layout usage counts driving inverse-frequency sub-task sampling."""

    def __init__(self):
        self._counts: dict[str, np.ndarray] = {}

    def counts(self, layout_name: str) -> np.ndarray:
        if layout_name not in self._counts:
            self._counts[layout_name] = np.zeros(N_SUBTASKS, dtype=np.int64)
        return self._counts[layout_name]

    def increment(self, layout_name: str, task: SubTask) -> None:
        if task == SubTask.UNKNOWN:
            raise ValueError("Unknown is never assigned or counted")
        self.counts(layout_name)[task] += 1

    def to_dict(self) -> dict:
        return {k: v.tolist() for k, v in self._counts.items()}


def sample_subtask(
    counter: SubTaskUsageCounter,
    layout_name: str,
    mask: SubTaskMask,
    rng: np.random.Generator,
) -> SubTask:
    """Sample a concrete feasible sub-task with P(t) proportional to 1/(1+count)."""
    tasks = mask.concrete_tasks()
    if not tasks:
        raise NoFeasibleSubTask(f"no concrete sub-task feasible on {layout_name}")
    counts = counter.counts(layout_name)
    weights = np.array([1.0 / (1.0 + counts[t]) for t in tasks])
    weights /= weights.sum()
    return tasks[int(rng.choice(len(tasks), p=weights))]


class _TeammateDriver:
    """Steps the partner's actor once per tick with the env's rng."""

    def __init__(self, policy: Policy, layout: Layout, seat: int):
        self.actor = policy.session(layout, seat)

    def reset(self) -> None:
        self.actor.reset()

    def act(self, state: GameState, rng: np.random.Generator) -> Action:
        return self.actor.act(state, rng)


class PairedKitchenEnv(RolloutEnv):
    """Full-game env for flat policies: ego earns the shared base reward while
    a partner (sampled per episode) controls the other seat."""

    def __init__(
        self,
        layouts: Sequence[Layout],
        encoder: EncoderConfig,
        partners: Sequence[Policy],
        kitchen: KitchenConfig = DEFAULT_CONFIG,
        alternate_seats: bool = True,
    ):
        self.layouts = list(layouts)
        self.encoder = encoder
        self.partners = list(partners)
        self.kitchen = kitchen
        self.alternate_seats = alternate_seats
        self.obs_dim = encoder.obs_dim(self.layouts[0])
        for l in self.layouts:
            if encoder.obs_dim(l) != self.obs_dim:
                raise ValueError(
                    "encoder gives different obs dims across layouts; "
                    "use an egocentric view for multi-layout training"
                )
        self.n_actions = 6
        self.partner_log: list[str] = []
        self._episode = 0

    def reset(self, rng: np.random.Generator):
        self._rng = rng
        self.layout = self.layouts[self._episode % len(self.layouts)]
        partner = self.partners[int(rng.integers(len(self.partners)))]
        self.partner_log.append(getattr(partner, "id", type(partner).__name__))
        if self.alternate_seats:
            self.ego = self._episode % 2
        else:
            self.ego = int(rng.integers(2))
        self._episode += 1
        self.mate = _TeammateDriver(partner, self.layout, 1 - self.ego)
        self.pipeline = ObservationPipeline(self.encoder, self.layout, self.kitchen)
        self.state = initial_state(self.layout)
        return self.pipeline.encode(self.state, self.ego), None

    def step(self, action: int):
        mate_action = self.mate.act(self.state, self._rng)
        joint = [None, None]
        joint[self.ego] = Action(action)
        joint[1 - self.ego] = mate_action
        outcome = step(self.state, tuple(joint), self.layout, self.kitchen)
        self.state = outcome.next
        done = self.state.tick >= self.kitchen.horizon
        obs = self.pipeline.encode(self.state, self.ego)
        return obs, float(outcome.reward), done, None


class SelfPlayEnv(PairedKitchenEnv):
    """Both seats run the live (still-updating) network."""

    def __init__(
        self,
        layouts: Sequence[Layout],
        encoder: EncoderConfig,
        net: ActorCriticNet,
        kitchen: KitchenConfig = DEFAULT_CONFIG,
    ):
        from ..agents.neural import NeuralPolicy

        partner = NeuralPolicy(net, encoder, policy_id="selfplay-live", kitchen=kitchen)
        super().__init__(layouts, encoder, [partner], kitchen)


@dataclass
class WorkerEnvConfig:
    timeout: int = 30
    counter_shaping: float = 0.05  # per BFS step saved
    pot_bonus: float = 0.2
    use_reachability: bool = True


# Where the object would otherwise come from / go to; used to price how many
# steps a counter shortcut saves.
_NATURAL_TARGET = {
    SubTask.PICKUP_ONION_FROM_COUNTER: SubTask.PICKUP_ONION_FROM_DISPENSER,
    SubTask.PICKUP_DISH_FROM_COUNTER: SubTask.PICKUP_DISH_FROM_DISPENSER,
    SubTask.PICKUP_SOUP_FROM_COUNTER: SubTask.GET_SOUP_FROM_POT,
    SubTask.PLACE_ONION_ON_COUNTER: SubTask.PLACE_ONION_IN_POT,
    SubTask.PLACE_DISH_ON_COUNTER: SubTask.GET_SOUP_FROM_POT,
    SubTask.PLACE_SOUP_ON_COUNTER: SubTask.SERVE_SOUP,
}

_COUNTER_TASKS = frozenset(_NATURAL_TARGET)


def counter_steps_saved(
    state: GameState,
    ego: int,
    chosen_counter,
    task: SubTask,
    layout: Layout,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> int:
    """BFS steps saved by using `chosen_counter` instead of walking to the
    task's natural target, measured from the ego's current cell with the
    teammate treated as an obstacle. Clamped at >= 0; 0 when no natural
    target exists."""
    me = (int(state.positions[ego, 0]), int(state.positions[ego, 1]))
    other = (int(state.positions[1 - ego, 0]), int(state.positions[1 - ego, 1]))
    dist = bfs_distances(layout, me, other)

    def standing_dist(cells) -> Optional[int]:
        best = None
        for cell in cells:
            for adj in adjacent_floor_cells(layout, cell):
                d = dist[adj]
                if d >= 0 and (best is None or d < best):
                    best = int(d)
        return best

    natural = goal_cells(state, _NATURAL_TARGET[task], layout, kitchen)
    d_nat = standing_dist(natural)
    d_counter = standing_dist([chosen_counter])
    if d_nat is None or d_counter is None:
        return 0
    return max(d_nat - d_counter, 0)


def pot_bonus_applies(prev: GameState, pot_cell, layout: Layout,
                      kitchen: KitchenConfig = DEFAULT_CONFIG) -> bool:
    """True when the onion went into the (strictly) fullest non-full pot."""
    pot_i = int(layout.pot_index[pot_cell])
    mine = int(prev.pot_onions[pot_i])
    for i in range(len(layout.pot_cells)):
        if i == pot_i:
            continue
        onions = int(prev.pot_onions[i])
        if onions < kitchen.pot_capacity and onions >= mine:
            return False
    return True


class WorkerEnv(RolloutEnv):
    """Sub-task execution episodes: one assigned sub-task, done at the ego's
    first Interact or at timeout; +1 on completion, -1 otherwise, plus small
    shaping for counter shortcuts and for topping up the fullest pot."""

    n_actions = 6

    def __init__(
        self,
        layout: Layout,
        encoder: EncoderConfig,
        teammate: Policy,
        usage: SubTaskUsageCounter,
        config: WorkerEnvConfig = WorkerEnvConfig(),
        kitchen: KitchenConfig = DEFAULT_CONFIG,
        ego: int = 0,
    ):
        if not encoder.goal_layer:
            raise ValueError("worker encoder must include the goal layer")
        self.layout = layout
        self.encoder = encoder
        self.teammate_policy = teammate
        self.usage = usage
        self.config = config
        self.kitchen = kitchen
        self.ego = ego
        self.obs_dim = encoder.obs_dim(layout)
        self.completions = {"completed": 0, "wrong": 0, "timeout": 0}
        self.state: GameState | None = None

    def reset(self, rng: np.random.Generator):
        """Start a new sub-task episode. The kitchen itself persists across
        episodes (so the policy sees mid-game boards); it only restarts on the
        first call and when the base game's horizon runs out mid-episode."""
        self._rng = rng
        if self.state is None:
            self.state = initial_state(self.layout)
            self.mate = _TeammateDriver(
                self.teammate_policy, self.layout, 1 - self.ego
            )
            self.pipeline = ObservationPipeline(self.encoder, self.layout,
                                                self.kitchen)
        self.pipeline.reset()
        self._sample_task()
        return self._obs(), None

    def _sample_task(self) -> None:
        for _ in range(2):
            mask = feasible_mask(
                self.state, self.ego, self.layout, self.kitchen,
                use_reachability=self.config.use_reachability,
            )
            if mask.concrete_tasks():
                break
            self.state = initial_state(self.layout)  # dead end: fresh board
        else:
            raise NoFeasibleSubTask(self.layout.name)
        self.assigned = sample_subtask(self.usage, self.layout.name, mask, self._rng)
        self.usage.increment(self.layout.name, self.assigned)
        self.episode_ticks = 0

    def _obs(self) -> np.ndarray:
        goal = goal_layer(
            self.state, self.ego, self.assigned, self.layout, self.kitchen,
            use_reachability=self.config.use_reachability,
        )
        return self.pipeline.encode(self.state, self.ego, goal=goal)

    def step(self, action: int):
        prev = self.state
        mate_action = self.mate.act(prev, self._rng)
        joint = [None, None]
        joint[self.ego] = Action(action)
        joint[1 - self.ego] = mate_action
        outcome = step(prev, tuple(joint), self.layout, self.kitchen)
        self.state = outcome.next
        self.episode_ticks += 1

        status = completion_check(prev, outcome, self.ego, self.assigned)
        done = False
        reward = 0.0
        if status == Completion.COMPLETED:
            reward = 1.0 + self._shaping(prev, outcome)
            done = True
            self.completions["completed"] += 1
        elif status == Completion.WRONG_INTERACT:
            reward = -1.0
            done = True
            self.completions["wrong"] += 1
        elif self.episode_ticks >= self.config.timeout:
            reward = -1.0
            done = True
            self.completions["timeout"] += 1

        if self.state.tick >= self.kitchen.horizon:
            # base-game horizon: back to the standard start state
            self.state = initial_state(self.layout)
            self.mate.reset()
            if not done:
                reward = -1.0
                done = True
                self.completions["timeout"] += 1

        return self._obs(), reward, done, None

    def _shaping(self, prev: GameState, outcome) -> float:
        event = outcome.events[self.ego]
        task = self.assigned
        bonus = 0.0
        if task in _COUNTER_TASKS:
            saved = counter_steps_saved(
                prev, self.ego, event.cell, task, self.layout, self.kitchen
            )
            bonus += self.config.counter_shaping * saved
        elif task == SubTask.PLACE_ONION_IN_POT:
            if pot_bonus_applies(prev, event.cell, self.layout, self.kitchen):
                bonus += self.config.pot_bonus
        return bonus


class ManagerEnv(RolloutEnv):
    """Sub-task selection at every tick: the frozen executor turns the chosen
    sub-task into a primitive action; reward is the shared base-game reward."""

    n_actions = N_SUBTASKS

    def __init__(
        self,
        layout: Layout,
        manager_encoder: EncoderConfig,
        worker_net: ActorCriticNet,
        worker_encoder: EncoderConfig,
        teammate: Policy,
        kitchen: KitchenConfig = DEFAULT_CONFIG,
        ego: int = 0,
        use_reachability: bool = True,
        worker_greedy: bool = False,
    ):
        self.layout = layout
        self.manager_encoder = manager_encoder
        self.worker_net = worker_net
        self.worker_encoder = worker_encoder
        self.teammate_policy = teammate
        self.kitchen = kitchen
        self.ego = ego
        self.use_reachability = use_reachability
        self.worker_greedy = worker_greedy
        self.obs_dim = manager_encoder.obs_dim(layout)
        self.masked_violations = 0

    def reset(self, rng: np.random.Generator):
        self._rng = rng
        self.state = initial_state(self.layout)
        self.mate = _TeammateDriver(self.teammate_policy, self.layout, 1 - self.ego)
        self.m_pipe = ObservationPipeline(self.manager_encoder, self.layout, self.kitchen)
        self.w_pipe = ObservationPipeline(self.worker_encoder, self.layout, self.kitchen)
        self._mask = self._feasible()
        return self.m_pipe.encode(self.state, self.ego), self._mask.as_array().astype(np.float32)

    def _feasible(self) -> SubTaskMask:
        return feasible_mask(
            self.state, self.ego, self.layout, self.kitchen,
            use_reachability=self.use_reachability,
        )

    def step(self, sub_task_action: int):
        task = SubTask(sub_task_action)
        if task not in self._mask:
            self.masked_violations += 1
            raise MaskedActionChosen(f"{task.wire_name} is masked at tick {self.state.tick}")
        goal = goal_layer(
            self.state, self.ego, task, self.layout, self.kitchen,
            use_reachability=self.use_reachability,
        )
        w_obs = self.w_pipe.encode(self.state, self.ego, goal=goal)
        with torch.no_grad():
            logits = self.worker_net.logits(torch.from_numpy(w_obs))
            probs = torch.softmax(logits, dim=-1).numpy()
        if self.worker_greedy:
            action = int(np.argmax(probs))
        else:
            action = int(self._rng.choice(6, p=probs / probs.sum()))
        mate_action = self.mate.act(self.state, self._rng)
        joint = [None, None]
        joint[self.ego] = Action(action)
        joint[1 - self.ego] = mate_action
        outcome = step(self.state, tuple(joint), self.layout, self.kitchen)
        self.state = outcome.next
        done = self.state.tick >= self.kitchen.horizon
        self._mask = self._feasible()
        obs = self.m_pipe.encode(self.state, self.ego)
        return obs, float(outcome.reward), done, self._mask.as_array().astype(np.float32)


class BanditEnv(RolloutEnv):
    """One-state sanity env: reward 1 for Interact, 0 otherwise."""

    obs_dim = 4
    n_actions = 6

    def reset(self, rng: np.random.Generator):
        return np.ones(self.obs_dim, dtype=np.float32), None

    def step(self, action: int):
        reward = 1.0 if action == int(Action.INTERACT) else 0.0
        return np.ones(self.obs_dim, dtype=np.float32), reward, True, None
