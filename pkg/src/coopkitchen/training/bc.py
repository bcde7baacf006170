"""Behavior cloning from recorded trajectories, plus the proxy/bc split:
two models are trained on disjoint halves of the data and the one that scores
higher alongside the scripted greedy agent becomes the stand-in human."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch

from ..agents.neural import ActorCriticNet, NetworkSpec, NeuralPolicy
from ..agents.policies import Policy, ScriptedGreedyPolicy
from ..core.engine import step_inplace
from ..core.layout import load_bundled_layout
from ..core.types import (
    Action,
    DEFAULT_CONFIG,
    GameState,
    KitchenConfig,
    Layout,
    initial_state,
)
from ..observations import EncoderConfig, encode_features, feature_vector_dim


class EmptyAfterFilter(Exception):
    pass


class SingleClassDegenerate(Exception):
    pass


@dataclass
class TrajectoryDataset:
    """Episodes of (state, joint-action) pairs recorded on one layout."""

    layout_name: str
    episodes: list[list[tuple[GameState, tuple[Action, Action]]]]
    source: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.episodes)

    def n_timesteps(self) -> int:
        return sum(len(ep) for ep in self.episodes)

    def save(self, out_dir: str | Path) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "meta.json").write_text(json.dumps(
            {"layout": self.layout_name, "source": self.source,
             "episodes": len(self.episodes)}, indent=2))
        with (out_dir / "episodes.jsonl").open("w") as f:
            for ep in self.episodes:
                f.write(json.dumps([
                    {"state": s.to_dict(), "actions": [int(a) for a in acts]}
                    for s, acts in ep
                ]) + "\n")

    @classmethod
    def load(cls, in_dir: str | Path) -> "TrajectoryDataset":
        in_dir = Path(in_dir)
        meta = json.loads((in_dir / "meta.json").read_text())
        layout = load_bundled_layout(meta["layout"])
        episodes = []
        with (in_dir / "episodes.jsonl").open() as f:
            for line in f:
                ep = [
                    (GameState.from_dict(item["state"], layout),
                     (Action(item["actions"][0]), Action(item["actions"][1])))
                    for item in json.loads(line)
                ]
                episodes.append(ep)
        return cls(meta["layout"], episodes, meta.get("source", {}))


def import_raw_trajectories(raw_path: str | Path) -> TrajectoryDataset:
    """Read the ingestion format: one episode object (or a list of them)
    shaped {"layout": name, "states": [...], "joint_actions": [[a, b], ...]},
    where states are the compact dictionaries produced by the engine."""
    payload = json.loads(Path(raw_path).read_text())
    if isinstance(payload, dict):
        payload = [payload]
    if not payload:
        raise EmptyAfterFilter("no episodes in raw file")
    layout_name = payload[0]["layout"]
    layout = load_bundled_layout(layout_name)
    episodes = []
    for ep in payload:
        if ep["layout"] != layout_name:
            raise ValueError("all episodes in one dataset must share a layout")
        if len(ep["states"]) != len(ep["joint_actions"]):
            raise ValueError("states and joint_actions length mismatch")
        episodes.append([
            (GameState.from_dict(s, layout), (Action(a0), Action(a1)))
            for s, (a0, a1) in zip(ep["states"], ep["joint_actions"])
        ])
    return TrajectoryDataset(
        layout_name, episodes, source={"imported_from": str(raw_path)},
    )


def record_trajectories(
    policies: tuple[Policy, Policy],
    layout: Layout,
    n_episodes: int,
    seed: int = 0,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> TrajectoryDataset:
    """Roll out a pair of policies and keep every (state, joint action)."""
    rng = np.random.default_rng(seed)
    episodes = []
    for _ in range(n_episodes):
        actors = [p.session(layout, seat) for seat, p in enumerate(policies)]
        state = initial_state(layout)
        ep = []
        for _ in range(kitchen.horizon):
            acts = (actors[0].act(state, rng), actors[1].act(state, rng))
            ep.append((state.copy(), acts))
            step_inplace(state, acts, layout, kitchen)
        episodes.append(ep)
    return TrajectoryDataset(
        layout.name, episodes,
        source={"recorded_from": [getattr(p, "id", type(p).__name__)
                                  for p in policies], "seed": seed},
    )


def _samples(
    episodes, layout: Layout, kitchen: KitchenConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Flatten to per-seat (features, action) pairs, dropping timesteps where
    both seats chose Stay."""
    xs, ys = [], []
    for ep in episodes:
        for state, (a0, a1) in ep:
            if a0 == Action.STAY and a1 == Action.STAY:
                continue
            for seat, action in ((0, a0), (1, a1)):
                xs.append(encode_features(state, layout, seat, kitchen))
                ys.append(int(action))
    if not xs:
        raise EmptyAfterFilter("no timesteps survive the joint-Stay filter")
    return np.stack(xs).astype(np.float32), np.array(ys, dtype=np.int64)


def action_weights(labels: np.ndarray, n_actions: int = 6) -> np.ndarray:
    """Per-class loss weights inversely proportional to empirical frequency,
    normalized so present classes average 1. Absent classes get weight 0."""
    counts = np.bincount(labels, minlength=n_actions).astype(np.float64)
    present = counts > 0
    if present.sum() < 2:
        raise SingleClassDegenerate(
            "behavior cloning needs at least two distinct actions"
        )
    w = np.zeros(n_actions)
    w[present] = 1.0 / counts[present]
    w[present] *= present.sum() / w[present].sum()
    return w


def fit_bc_net(
    xs: np.ndarray,
    ys: np.ndarray,
    input_dim: int,
    hidden_dim: int = 64,
    epochs: int = 30,
    batch_size: int = 256,
    lr: float = 1e-3,
    seed: int = 0,
) -> ActorCriticNet:
    torch.manual_seed(seed)
    net = ActorCriticNet(NetworkSpec(input_dim, hidden_dim, 6))
    weights = torch.from_numpy(action_weights(ys)).float()
    loss_fn = torch.nn.CrossEntropyLoss(weight=weights)
    opt = torch.optim.Adam(net.parameters(), lr=lr)
    x_t = torch.from_numpy(xs)
    y_t = torch.from_numpy(ys)
    rng = np.random.default_rng(seed)
    n = len(ys)
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = torch.from_numpy(order[lo:lo + batch_size])
            logits, _ = net(x_t[idx])
            loss = loss_fn(logits, y_t[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
    return net


def paired_score(
    policy: Policy,
    partner: Policy,
    layout: Layout,
    n_episodes: int = 4,
    seed: int = 0,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> float:
    """Mean episode score with `policy` and `partner` alternating seats."""
    rng = np.random.default_rng(seed)
    total = 0.0
    for ep in range(n_episodes):
        seat = ep % 2
        pair = [None, None]
        pair[seat] = policy.session(layout, seat)
        pair[1 - seat] = partner.session(layout, 1 - seat)
        state = initial_state(layout)
        for _ in range(kitchen.horizon):
            acts = (pair[0].act(state, rng), pair[1].act(state, rng))
            step_inplace(state, acts, layout, kitchen)
        total += float(state.score)
    return total / n_episodes


@dataclass
class BcResult:
    proxy: NeuralPolicy
    bc: NeuralPolicy
    proxy_score: float
    bc_score: float


def train_bc(
    dataset: TrajectoryDataset,
    layout: Optional[Layout] = None,
    hidden_dim: int = 64,
    epochs: int = 30,
    eval_episodes: int = 4,
    seed: int = 0,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> BcResult:
    """Clone two models from disjoint halves of the episodes; the one that
    plays better next to the scripted greedy agent becomes the proxy."""
    layout = layout or load_bundled_layout(dataset.layout_name)
    if not dataset.episodes:
        raise EmptyAfterFilter("dataset has no episodes")
    half = max(len(dataset.episodes) // 2, 1)
    halves = [dataset.episodes[:half], dataset.episodes[half:] or dataset.episodes[:half]]
    encoder = EncoderConfig(kind="features")
    input_dim = feature_vector_dim(layout)

    models = []
    for i, episodes in enumerate(halves):
        xs, ys = _samples(episodes, layout, kitchen)
        net = fit_bc_net(xs, ys, input_dim, hidden_dim, epochs, seed=seed + i)
        models.append(NeuralPolicy(net, encoder, policy_id=f"bc-half{i}",
                                   kitchen=kitchen))

    probe = ScriptedGreedyPolicy()
    scores = [
        paired_score(m, probe, layout, eval_episodes, seed, kitchen)
        for m in models
    ]
    best = int(np.argmax(scores))
    proxy, bc = models[best], models[1 - best]
    proxy.id = "bc-proxy"
    bc.id = "bc-teammate"
    return BcResult(proxy, bc, scores[best], scores[1 - best])
