"""The four trainable agent variants.

- bcp / fcp: one flat 6-action policy trained with PPO against cloned-human
  (bcp) or population (fcp) teammates.
- ha2_bcp / ha2_fcp: a goal-conditioned executor is trained first on short
  sub-task episodes, then frozen while a sub-task selector is trained on the
  full game against the same kind of teammates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch

from ..agents.neural import ActorCriticNet, HierarchicalPolicy, NetworkSpec, NeuralPolicy
from ..agents.policies import Actor, Policy, RandomPolicy
from ..core.types import DEFAULT_CONFIG, KitchenConfig, Layout
from ..observations import EncoderConfig
from ..subtasks import N_SUBTASKS
from .envs import ManagerEnv, PairedKitchenEnv, SubTaskUsageCounter, WorkerEnv, WorkerEnvConfig
from .ppo import LearningCurve, PpoConfig, ppo_train

VARIANTS = ("bcp", "fcp", "ha2_bcp", "ha2_fcp")


class MixturePolicy(Policy):
    """Uniformly samples one of the member policies per session (episode)."""

    def __init__(self, members: Sequence[Policy], seed: int = 0,
                 policy_id: str = "mixture"):
        if not members:
            raise ValueError("empty mixture")
        self.members = list(members)
        self.id = policy_id
        self._rng = np.random.default_rng(seed)
        self.sample_log: list[str] = []

    def session(self, layout: Layout, ego: int) -> Actor:
        member = self.members[int(self._rng.integers(len(self.members)))]
        self.sample_log.append(getattr(member, "id", type(member).__name__))
        return member.session(layout, ego)


def default_worker_encoder() -> EncoderConfig:
    return EncoderConfig(kind="lossless", view="egocentric", crop_size=7,
                         goal_layer=True)


def default_flat_encoder() -> EncoderConfig:
    return EncoderConfig(kind="lossless", view="full")


def default_manager_encoder() -> EncoderConfig:
    return EncoderConfig(kind="lossless", view="full")


@dataclass
class VariantResult:
    variant: str
    policy: Policy
    curves: dict = field(default_factory=dict)  # name -> LearningCurve
    worker_completions: Optional[dict] = None

    def save(self, out_dir: str | Path) -> Path:
        from ..agents.checkpoint import save_checkpoint

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{self.variant}.ckpt"
        save_checkpoint(self.policy, path)
        for name, curve in self.curves.items():
            curve.write_csv(out_dir / f"{self.variant}-{name}-curve.csv")
        return path


def train_flat_variant(
    variant: str,
    partners: Sequence[Policy],
    layouts: Sequence[Layout],
    ppo: Optional[PpoConfig] = None,
    encoder: Optional[EncoderConfig] = None,
    hidden_dim: int = 64,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> VariantResult:
    ppo = ppo or PpoConfig()
    encoder = encoder or default_flat_encoder()
    torch.manual_seed(ppo.seed)
    net = ActorCriticNet(NetworkSpec(encoder.obs_dim(layouts[0]), hidden_dim, 6))
    envs: list[PairedKitchenEnv] = []

    def factory(i: int) -> PairedKitchenEnv:
        env = PairedKitchenEnv(layouts, encoder, partners, kitchen)
        envs.append(env)
        return env

    net, curve = ppo_train(factory, net, ppo)
    policy = NeuralPolicy(net, encoder, policy_id=variant, kitchen=kitchen)
    result = VariantResult(variant, policy, {"flat": curve})
    result.partner_log = [pid for env in envs for pid in env.partner_log]
    return result


def train_worker(
    layout: Layout,
    teammate: Policy,
    ppo: Optional[PpoConfig] = None,
    encoder: Optional[EncoderConfig] = None,
    hidden_dim: int = 64,
    worker_config: WorkerEnvConfig = WorkerEnvConfig(),
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> tuple[ActorCriticNet, LearningCurve, dict]:
    """Short-episode sub-task training. Returns (net, curve, completion tallies)."""
    ppo = ppo or PpoConfig()
    encoder = encoder or default_worker_encoder()
    torch.manual_seed(ppo.seed)
    net = ActorCriticNet(NetworkSpec(encoder.obs_dim(layout), hidden_dim, 6))
    usage = SubTaskUsageCounter()
    envs: list[WorkerEnv] = []

    def factory(i: int) -> WorkerEnv:
        env = WorkerEnv(layout, encoder, teammate, usage, worker_config, kitchen)
        envs.append(env)
        return env

    net, curve = ppo_train(factory, net, ppo)
    tallies = {"completed": 0, "wrong": 0, "timeout": 0}
    for env in envs:
        for k in tallies:
            tallies[k] += env.completions[k]
    return net, curve, tallies


def train_manager(
    layout: Layout,
    worker_net: ActorCriticNet,
    teammate: Policy | str,
    ppo: Optional[PpoConfig] = None,
    manager_encoder: Optional[EncoderConfig] = None,
    worker_encoder: Optional[EncoderConfig] = None,
    hidden_dim: int = 64,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> tuple[ActorCriticNet, LearningCurve]:
    """teammate="self" pairs the selector with a live copy of itself (both
    seats share the updating nets)."""
    ppo = ppo or PpoConfig()
    manager_encoder = manager_encoder or default_manager_encoder()
    worker_encoder = worker_encoder or default_worker_encoder()
    torch.manual_seed(ppo.seed + 1)
    net = ActorCriticNet(
        NetworkSpec(manager_encoder.obs_dim(layout), hidden_dim, N_SUBTASKS)
    )
    if teammate == "self":
        teammate = HierarchicalPolicy(
            net, manager_encoder, worker_net, worker_encoder,
            policy_id="selfplay-live", kitchen=kitchen,
        )

    def factory(i: int) -> ManagerEnv:
        return ManagerEnv(layout, manager_encoder, worker_net, worker_encoder,
                          teammate, kitchen)

    net, curve = ppo_train(factory, net, ppo)
    return net, curve


def train_hierarchical_variant(
    variant: str,
    partners: Sequence[Policy],
    layout: Layout,
    ppo: Optional[PpoConfig] = None,
    worker_teammate: Optional[Policy] = None,
    hidden_dim: int = 64,
    worker_share: float = 0.5,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> VariantResult:
    """Trains the executor first (against `worker_teammate`, random-action by
    default), then the selector against the variant's teammates with the
    executor frozen. The timestep budget is split by `worker_share`."""
    ppo = ppo or PpoConfig()
    worker_encoder = default_worker_encoder()
    manager_encoder = default_manager_encoder()
    worker_teammate = worker_teammate or RandomPolicy()
    worker_budget = int(ppo.total_timesteps * worker_share)
    manager_budget = ppo.total_timesteps - worker_budget

    worker_net, worker_curve, tallies = train_worker(
        layout, worker_teammate,
        replace(ppo, total_timesteps=worker_budget),
        worker_encoder, hidden_dim, kitchen=kitchen,
    )
    worker_net.eval()
    for p in worker_net.parameters():
        p.requires_grad_(False)

    teammate = MixturePolicy(partners, seed=ppo.seed, policy_id=f"{variant}-partners")
    manager_net, manager_curve = train_manager(
        layout, worker_net, teammate,
        replace(ppo, total_timesteps=manager_budget),
        manager_encoder, worker_encoder, hidden_dim, kitchen,
    )
    policy = HierarchicalPolicy(
        manager_net, manager_encoder, worker_net, worker_encoder,
        policy_id=variant, kitchen=kitchen,
    )
    return VariantResult(
        variant, policy,
        {"worker": worker_curve, "manager": manager_curve},
        worker_completions=tallies,
    )


def train_variant(
    variant: str,
    partners: Sequence[Policy],
    layouts: Sequence[Layout],
    ppo: Optional[PpoConfig] = None,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
    **kwargs,
) -> VariantResult:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant in ("bcp", "fcp"):
        return train_flat_variant(variant, partners, layouts, ppo,
                                  kitchen=kitchen, **kwargs)
    if len(layouts) != 1:
        raise ValueError("hierarchical variants train one layout at a time")
    return train_hierarchical_variant(variant, partners, layouts[0], ppo,
                                      kitchen=kitchen, **kwargs)
