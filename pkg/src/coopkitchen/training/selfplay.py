"""Self-play population construction: 8 base agents (seed x width x frame
stacking), each snapshotted at start, at a mid-skill point, and at the end."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch

from ..agents.checkpoint import (
    PopulationEntry,
    save_checkpoint,
    save_population_manifest,
)
from ..agents.neural import ActorCriticNet, NetworkSpec, NeuralPolicy
from ..core.engine import step_inplace
from ..core.types import DEFAULT_CONFIG, Action, KitchenConfig, Layout, initial_state
from ..observations import EncoderConfig, ObservationPipeline
from .envs import SelfPlayEnv
from .ppo import LearningCurve, PpoConfig, ppo_train


def selfplay_score(
    net: ActorCriticNet,
    encoder: EncoderConfig,
    layout: Layout,
    n_episodes: int = 4,
    seed: int = 0,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> float:
    """Mean episode score with the same net on both seats (stochastic)."""
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(n_episodes):
        state = initial_state(layout)
        pipes = [ObservationPipeline(encoder, layout, kitchen) for _ in range(2)]
        for _ in range(kitchen.horizon):
            actions = []
            for seat in range(2):
                obs = pipes[seat].encode(state, seat)
                with torch.no_grad():
                    logits = net.logits(torch.from_numpy(obs))
                    probs = torch.softmax(logits, dim=-1).numpy()
                actions.append(Action(int(rng.choice(6, p=probs / probs.sum()))))
            step_inplace(state, (actions[0], actions[1]), layout, kitchen)
        total += float(state.score)
    return total / n_episodes


@dataclass
class BaseAgentSpec:
    seed: int
    hidden_dim: int
    frame_stack: bool

    @property
    def agent_id(self) -> str:
        stack = "stack" if self.frame_stack else "nostack"
        return f"sp-s{self.seed}-h{self.hidden_dim}-{stack}"

    def encoder(self) -> EncoderConfig:
        return EncoderConfig(
            kind="lossless", view="full",
            stack=4 if self.frame_stack else 1,
        )


def default_population_specs(base_seed: int = 0) -> list[BaseAgentSpec]:
    """8 agents: 2 seeds x hidden {64, 256} x frame stacking on/off."""
    specs = []
    for seed_off in (0, 1):
        for hidden in (64, 256):
            for stacked in (False, True):
                specs.append(BaseAgentSpec(base_seed + seed_off, hidden, stacked))
    return specs


@dataclass
class SelfPlayResult:
    spec: BaseAgentSpec
    curve: LearningCurve
    entries: list[PopulationEntry]
    scores_by_layout: dict = field(default_factory=dict)


def train_base_agent(
    spec: BaseAgentSpec,
    layouts: Sequence[Layout],
    out_dir: str | Path,
    ppo: Optional[PpoConfig] = None,
    snapshot_every: int = 4,  # PPO updates between candidate snapshots
    eval_episodes: int = 4,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> SelfPlayResult:
    """Self-play PPO for one base agent. Saves three checkpoint stages:

    - init: the untrained net
    - final: the net at the end of training
    - mid: per layout, the snapshot whose self-play score is closest to half
      the best score any snapshot reached on that layout
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    encoder = spec.encoder()
    ppo = replace(ppo or PpoConfig(), seed=spec.seed)

    torch.manual_seed(spec.seed)
    net = ActorCriticNet(NetworkSpec(encoder.obs_dim(layouts[0]), spec.hidden_dim, 6))

    def policy_of(n: ActorCriticNet, suffix: str) -> NeuralPolicy:
        return NeuralPolicy(n, encoder, policy_id=f"{spec.agent_id}:{suffix}")

    init_path = out_dir / f"{spec.agent_id}-init.ckpt"
    save_checkpoint(policy_of(net, "init"), init_path)

    snapshots: list[tuple[int, Path, dict]] = []  # (timesteps, path, score by layout)
    update_count = 0

    def on_update(timesteps: int, live: ActorCriticNet) -> None:
        nonlocal update_count
        update_count += 1
        if update_count % snapshot_every != 0:
            return
        snap_path = out_dir / f"{spec.agent_id}-t{timesteps}.ckpt"
        save_checkpoint(policy_of(live, f"t{timesteps}"), snap_path)
        scores = {
            l.name: selfplay_score(live, encoder, l, eval_episodes, spec.seed, kitchen)
            for l in layouts
        }
        snapshots.append((timesteps, snap_path, scores))

    net, curve = ppo_train(
        lambda i: SelfPlayEnv(layouts, encoder, net, kitchen), net, ppo,
        on_update=on_update,
    )

    final_path = out_dir / f"{spec.agent_id}-final.ckpt"
    save_checkpoint(policy_of(net, "final"), final_path)
    final_scores = {
        l.name: selfplay_score(net, encoder, l, eval_episodes, spec.seed, kitchen)
        for l in layouts
    }
    snapshots.append((ppo.total_timesteps, final_path, final_scores))
    init_scores = {
        l.name: selfplay_score(
            _load_net(init_path), encoder, l, eval_episodes, spec.seed, kitchen
        )
        for l in layouts
    }
    snapshots.insert(0, (0, init_path, init_scores))

    mid_by_layout: dict[str, str] = {}
    for l in layouts:
        best = max(s[2][l.name] for s in snapshots)
        target = best / 2.0
        _, mid_path, _ = min(snapshots, key=lambda s: abs(s[2][l.name] - target))
        mid_by_layout[l.name] = mid_path.name

    entries = [
        PopulationEntry(spec.agent_id, spec.seed, spec.hidden_dim,
                        spec.frame_stack, "init", init_path.name),
        PopulationEntry(spec.agent_id, spec.seed, spec.hidden_dim,
                        spec.frame_stack, "mid", None, path_by_layout=mid_by_layout),
        PopulationEntry(spec.agent_id, spec.seed, spec.hidden_dim,
                        spec.frame_stack, "final", final_path.name),
    ]
    result = SelfPlayResult(spec, curve, entries, final_scores)
    curve.write_csv(out_dir / f"{spec.agent_id}-curve.csv")
    (out_dir / f"{spec.agent_id}-snapshots.json").write_text(json.dumps(
        [{"timesteps": t, "path": p.name, "scores": s} for t, p, s in snapshots],
        indent=2,
    ))
    return result


def _load_net(path: Path) -> ActorCriticNet:
    from ..agents.checkpoint import load_checkpoint

    return load_checkpoint(path).net


def build_population(
    layouts: Sequence[Layout],
    out_dir: str | Path,
    ppo: Optional[PpoConfig] = None,
    specs: Optional[list[BaseAgentSpec]] = None,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> Path:
    """Train all base agents and write population.json. Returns the manifest
    path."""
    out_dir = Path(out_dir)
    specs = specs or default_population_specs()
    entries: list[PopulationEntry] = []
    for spec in specs:
        result = train_base_agent(spec, layouts, out_dir, ppo, kitchen=kitchen)
        entries.extend(result.entries)
    manifest = out_dir / "population.json"
    save_population_manifest(entries, manifest)
    return manifest
