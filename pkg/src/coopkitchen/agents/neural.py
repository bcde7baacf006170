"""Neural policies: two-hidden-layer MLP actor-critic heads, flat and
hierarchical (sub-task selector + goal-conditioned executor)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from ..core.types import Action, DEFAULT_CONFIG, GameState, KitchenConfig, Layout
from ..observations import EncoderConfig, ObservationPipeline
from ..subtasks import N_SUBTASKS, SubTask, feasible_mask, goal_layer
from .policies import Actor, EncoderMismatch, Policy

MASK_FILL = -1e9  # applied to masked logits before normalization


@dataclass(frozen=True)
class NetworkSpec:
    input_dim: int
    hidden_dim: int
    n_actions: int  # 6 (primitive head) or 12 (sub-task head)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "n_actions": self.n_actions,
        }

    @staticmethod
    def from_dict(d: dict) -> "NetworkSpec":
        return NetworkSpec(**d)


class ActorCriticNet(nn.Module):
    """Flattened observation -> two-layer MLP trunk -> policy logits + value."""

    def __init__(self, spec: NetworkSpec):
        super().__init__()
        self.spec = spec
        self.trunk = nn.Sequential(
            nn.Linear(spec.input_dim, spec.hidden_dim),
            nn.Tanh(),
            nn.Linear(spec.hidden_dim, spec.hidden_dim),
            nn.Tanh(),
        )
        self.policy_head = nn.Linear(spec.hidden_dim, spec.n_actions)
        self.value_head = nn.Linear(spec.hidden_dim, 1)

    def forward(self, obs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        z = self.trunk(obs)
        return self.policy_head(z), self.value_head(z).squeeze(-1)

    def logits(self, obs: torch.Tensor) -> torch.Tensor:
        return self.policy_head(self.trunk(obs))


def masked_log_probs(logits: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Log-probabilities with masked-out entries at exactly -inf equivalent
    (probability 0). mask: 1 = allowed, 0 = forbidden."""
    filled = logits.masked_fill(mask == 0, MASK_FILL)
    return torch.log_softmax(filled, dim=-1)


class NeuralPolicy(Policy):
    """Flat policy over the 6 primitive actions."""

    def __init__(
        self,
        net: ActorCriticNet,
        encoder: EncoderConfig,
        policy_id: str = "neural",
        mode: str = "stochastic",
        kitchen: KitchenConfig = DEFAULT_CONFIG,
    ):
        if net.spec.n_actions != 6:
            raise ValueError("flat policy needs a 6-way action head")
        self.net = net
        self.encoder = encoder
        self.id = policy_id
        self.mode = mode
        self.kitchen = kitchen

    def session(self, layout: Layout, ego: int) -> Actor:
        if self.encoder.obs_dim(layout) != self.net.spec.input_dim:
            raise EncoderMismatch(
                f"layout {layout.name} gives obs dim {self.encoder.obs_dim(layout)}, "
                f"net expects {self.net.spec.input_dim}"
            )
        return _NeuralActor(self, layout, ego)


def sample_action(probs: np.ndarray, rng: np.random.Generator, mode: str) -> int:
    if mode == "greedy":
        return int(np.argmax(probs))  # argmax takes the lowest index on ties
    return int(rng.choice(len(probs), p=probs))


class _NeuralActor(Actor):
    def __init__(self, policy: NeuralPolicy, layout: Layout, ego: int):
        self.policy = policy
        self.ego = ego
        self.pipeline = ObservationPipeline(policy.encoder, layout, policy.kitchen)

    def reset(self) -> None:
        self.pipeline.reset()

    def act(self, state: GameState, rng: np.random.Generator) -> Action:
        obs = self.pipeline.encode(state, self.ego)
        with torch.no_grad():
            logits = self.policy.net.logits(torch.from_numpy(obs))
            probs = torch.softmax(logits, dim=-1).numpy()
        return Action(sample_action(probs, rng, self.policy.mode))


class HierarchicalPolicy(Policy):
    """Sub-task selector (12-way head, feasibility-masked) driving a frozen
    goal-conditioned executor (6-way head). The executor sees the chosen
    sub-task only through the appended goal channel."""

    def __init__(
        self,
        manager_net: ActorCriticNet,
        manager_encoder: EncoderConfig,
        worker_net: ActorCriticNet,
        worker_encoder: EncoderConfig,
        policy_id: str = "hierarchical",
        mode: str = "stochastic",
        kitchen: KitchenConfig = DEFAULT_CONFIG,
        use_reachability: bool = True,
    ):
        if manager_net.spec.n_actions != N_SUBTASKS:
            raise ValueError("manager needs a 12-way sub-task head")
        if worker_net.spec.n_actions != 6:
            raise ValueError("worker needs a 6-way action head")
        if not worker_encoder.goal_layer:
            raise ValueError("worker encoder must include the goal layer")
        self.manager_net = manager_net
        self.manager_encoder = manager_encoder
        self.worker_net = worker_net
        self.worker_encoder = worker_encoder
        self.id = policy_id
        self.mode = mode
        self.kitchen = kitchen
        self.use_reachability = use_reachability

    def session(self, layout: Layout, ego: int) -> "_HierarchicalActor":
        for enc, net, who in (
            (self.manager_encoder, self.manager_net, "manager"),
            (self.worker_encoder, self.worker_net, "worker"),
        ):
            if enc.obs_dim(layout) != net.spec.input_dim:
                raise EncoderMismatch(f"{who} encoder does not fit layout {layout.name}")
        return _HierarchicalActor(self, layout, ego)


class _HierarchicalActor(Actor):
    def __init__(self, policy: HierarchicalPolicy, layout: Layout, ego: int):
        self.policy = policy
        self.layout = layout
        self.ego = ego
        self.manager_pipe = ObservationPipeline(policy.manager_encoder, layout, policy.kitchen)
        self.worker_pipe = ObservationPipeline(policy.worker_encoder, layout, policy.kitchen)
        self.last_subtask: SubTask | None = None

    def reset(self) -> None:
        self.manager_pipe.reset()
        self.worker_pipe.reset()
        self.last_subtask = None

    def act(self, state: GameState, rng: np.random.Generator) -> Action:
        task, action = self.act_with_subtask(state, rng)
        return action

    def act_with_subtask(
        self, state: GameState, rng: np.random.Generator
    ) -> tuple[SubTask, Action]:
        policy = self.policy
        mask = feasible_mask(
            state, self.ego, self.layout, policy.kitchen,
            use_reachability=policy.use_reachability,
        )
        mask_arr = torch.from_numpy(mask.as_array().astype(np.float32))
        m_obs = self.manager_pipe.encode(state, self.ego)
        with torch.no_grad():
            logits = policy.manager_net.logits(torch.from_numpy(m_obs))
            probs = torch.exp(masked_log_probs(logits, mask_arr)).numpy()
        task = SubTask(sample_action(probs, rng, policy.mode))
        self.last_subtask = task

        goal = goal_layer(
            state, self.ego, task, self.layout, policy.kitchen,
            use_reachability=policy.use_reachability,
        )
        w_obs = self.worker_pipe.encode(state, self.ego, goal=goal)
        with torch.no_grad():
            w_logits = policy.worker_net.logits(torch.from_numpy(w_obs))
            w_probs = torch.softmax(w_logits, dim=-1).numpy()
        action = Action(sample_action(w_probs, rng, policy.mode))
        return task, action


def act_hierarchical(
    policy: HierarchicalPolicy,
    state: GameState,
    layout: Layout,
    ego: int,
    rng: np.random.Generator,
) -> tuple[SubTask, Action]:
    return policy.session(layout, ego).act_with_subtask(state, rng)
