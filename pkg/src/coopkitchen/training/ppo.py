"""Minimal PPO (clipped surrogate, GAE) over a small Gym-like env protocol.

Envs are stepped serially; with a fixed seed and single-threaded torch the
whole run is bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import torch

from ..agents.neural import ActorCriticNet, masked_log_probs


class NanLoss(Exception):
    pass


class DivergedValueFunction(Exception):
    pass


@dataclass
class PpoConfig:
    learning_rate: float = 3e-4
    lr_decay: bool = True
    clip_ratio: float = 0.2
    entropy_coef: float = 0.01
    entropy_coef_final: Optional[float] = None  # linear decay target when set
    value_coef: float = 0.5
    gae_lambda: float = 0.95
    discount: float = 0.99
    rollout_length: int = 256  # steps per env per update
    minibatch_size: int = 2048
    epochs_per_update: int = 4
    n_envs: int = 8
    total_timesteps: int = 1_000_000
    seed: int = 0
    max_grad_norm: float = 0.5
    value_divergence_limit: float = 1e6
    torch_threads: int = 1

    def __post_init__(self):
        assert 0.0 < self.clip_ratio < 1.0
        assert 0.0 < self.discount <= 1.0
        assert 0.0 < self.gae_lambda <= 1.0
        for name in ("learning_rate", "rollout_length", "minibatch_size",
                     "epochs_per_update", "n_envs"):
            assert getattr(self, name) > 0, name


class RolloutEnv:
    """Single-agent training-env protocol.

    reset(rng) -> (obs, mask or None); step(action) -> (obs, reward, done,
    mask or None). Masks are action-feasibility vectors (1 = allowed).
    """

    obs_dim: int
    n_actions: int

    def reset(self, rng: np.random.Generator):
        raise NotImplementedError

    def step(self, action: int):
        raise NotImplementedError


@dataclass
class LearningCurve:
    points: list[tuple[int, float, float]] = field(default_factory=list)
    # (timesteps, mean episode return, sem)

    def add(self, timesteps: int, returns: Sequence[float]) -> None:
        if not returns:
            return
        arr = np.asarray(returns, dtype=np.float64)
        sem = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
        self.points.append((timesteps, float(arr.mean()), sem))

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as f:
            f.write("timesteps,mean_return,sem\n")
            for t, m, s in self.points:
                f.write(f"{t},{m},{s}\n")


def ppo_loss(
    net: ActorCriticNet,
    obs: torch.Tensor,
    actions: torch.Tensor,
    old_log_probs: torch.Tensor,
    advantages: torch.Tensor,
    returns: torch.Tensor,
    masks: Optional[torch.Tensor],
    config: PpoConfig,
) -> tuple[torch.Tensor, dict]:
    logits, values = net(obs)
    if masks is not None:
        log_probs_all = masked_log_probs(logits, masks)
    else:
        log_probs_all = torch.log_softmax(logits, dim=-1)
    log_probs = log_probs_all.gather(1, actions.unsqueeze(1)).squeeze(1)
    ratio = torch.exp(log_probs - old_log_probs)
    clipped = torch.clamp(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio)
    policy_loss = -torch.min(ratio * advantages, clipped * advantages).mean()
    value_loss = 0.5 * (values - returns).pow(2).mean()
    probs = torch.exp(log_probs_all)
    entropy = -(probs * log_probs_all.clamp(min=-30.0)).sum(-1).mean()
    loss = (
        policy_loss
        + config.value_coef * value_loss
        - config.entropy_coef * entropy
    )
    stats = {
        "policy_loss": float(policy_loss.detach()),
        "value_loss": float(value_loss.detach()),
        "entropy": float(entropy.detach()),
        "ratio_max": float(ratio.detach().max()),
    }
    return loss, stats


def compute_gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    last_values: np.ndarray,
    discount: float,
    lam: float,
) -> tuple[np.ndarray, np.ndarray]:
    """rewards/values/dones: (T, N); last_values: (N,). Returns (adv, ret)."""
    T, N = rewards.shape
    adv = np.zeros((T, N), dtype=np.float32)
    gae = np.zeros(N, dtype=np.float32)
    next_values = last_values
    for t in range(T - 1, -1, -1):
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + discount * next_values * nonterminal - values[t]
        gae = delta + discount * lam * nonterminal * gae
        adv[t] = gae
        next_values = values[t]
    return adv, adv + values


def ppo_train(
    env_factory: Callable[[int], RolloutEnv],
    net: ActorCriticNet,
    config: PpoConfig,
    on_update: Optional[Callable[[int, ActorCriticNet], None]] = None,
) -> tuple[ActorCriticNet, LearningCurve]:
    """Train `net` in place; returns it along with the learning curve.

    env_factory(i) builds the i-th independent environment. on_update is
    called after each PPO update with the cumulative timestep count.
    """
    torch.set_num_threads(config.torch_threads)
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    envs = [env_factory(i) for i in range(config.n_envs)]
    n_envs = len(envs)
    env_rngs = [np.random.default_rng(rng.integers(2**63)) for _ in envs]

    optimizer = torch.optim.Adam(net.parameters(), lr=config.learning_rate)

    obs = np.zeros((n_envs, net.spec.input_dim), dtype=np.float32)
    masks = np.ones((n_envs, net.spec.n_actions), dtype=np.float32)
    has_mask = False
    for i, env in enumerate(envs):
        o, m = env.reset(env_rngs[i])
        obs[i] = o
        if m is not None:
            has_mask = True
            masks[i] = m

    curve = LearningCurve()
    ep_returns = [0.0] * n_envs
    finished_returns: list[float] = []
    timesteps = 0
    T = config.rollout_length

    while timesteps < config.total_timesteps:
        b_obs = np.zeros((T, n_envs, net.spec.input_dim), dtype=np.float32)
        b_masks = np.ones((T, n_envs, net.spec.n_actions), dtype=np.float32)
        b_actions = np.zeros((T, n_envs), dtype=np.int64)
        b_logp = np.zeros((T, n_envs), dtype=np.float32)
        b_rewards = np.zeros((T, n_envs), dtype=np.float32)
        b_dones = np.zeros((T, n_envs), dtype=np.float32)
        b_values = np.zeros((T, n_envs), dtype=np.float32)

        for t in range(T):
            obs_t = torch.from_numpy(obs)
            with torch.no_grad():
                logits, values = net(obs_t)
                if has_mask:
                    lp = masked_log_probs(logits, torch.from_numpy(masks))
                else:
                    lp = torch.log_softmax(logits, dim=-1)
                probs = torch.exp(lp).numpy()
            b_obs[t] = obs
            b_masks[t] = masks
            b_values[t] = values.numpy()
            for i, env in enumerate(envs):
                p = probs[i]
                p = p / p.sum()
                a = int(env_rngs[i].choice(net.spec.n_actions, p=p))
                b_actions[t, i] = a
                b_logp[t, i] = float(lp[i, a])
                o, r, done, m = env.step(a)
                b_rewards[t, i] = r
                b_dones[t, i] = float(done)
                ep_returns[i] += r
                if done:
                    finished_returns.append(ep_returns[i])
                    ep_returns[i] = 0.0
                    o, m = env.reset(env_rngs[i])
                obs[i] = o
                if m is not None:
                    masks[i] = m
            timesteps += n_envs

        with torch.no_grad():
            _, last_values = net(torch.from_numpy(obs))
        adv, ret = compute_gae(
            b_rewards, b_values, b_dones, last_values.numpy(),
            config.discount, config.gae_lambda,
        )

        flat = lambda x: x.reshape(T * n_envs, *x.shape[2:])
        f_obs = torch.from_numpy(flat(b_obs))
        f_actions = torch.from_numpy(flat(b_actions))
        f_logp = torch.from_numpy(flat(b_logp))
        f_adv = torch.from_numpy(flat(adv))
        f_ret = torch.from_numpy(flat(ret))
        f_masks = torch.from_numpy(flat(b_masks)) if has_mask else None
        f_adv = (f_adv - f_adv.mean()) / (f_adv.std() + 1e-8)

        if config.lr_decay:
            frac = 1.0 - min(timesteps / config.total_timesteps, 1.0)
            for group in optimizer.param_groups:
                group["lr"] = config.learning_rate * max(frac, 0.05)

        loss_config = config
        if config.entropy_coef_final is not None:
            done_frac = min(timesteps / config.total_timesteps, 1.0)
            coef = config.entropy_coef + done_frac * (
                config.entropy_coef_final - config.entropy_coef
            )
            loss_config = replace(config, entropy_coef=coef,
                                  entropy_coef_final=None)

        batch_size = T * n_envs
        mb = min(config.minibatch_size, batch_size)
        for _ in range(config.epochs_per_update):
            perm = torch.from_numpy(rng.permutation(batch_size))
            for start in range(0, batch_size, mb):
                idx = perm[start:start + mb]
                loss, stats = ppo_loss(
                    net, f_obs[idx], f_actions[idx], f_logp[idx],
                    f_adv[idx], f_ret[idx],
                    f_masks[idx] if f_masks is not None else None,
                    loss_config,
                )
                if not torch.isfinite(loss):
                    raise NanLoss(f"non-finite loss at {timesteps} steps: {stats}")
                optimizer.zero_grad()
                loss.backward()
                torch.nn.utils.clip_grad_norm_(net.parameters(), config.max_grad_norm)
                optimizer.step()
        if stats["value_loss"] > config.value_divergence_limit:
            raise DivergedValueFunction(f"value loss {stats['value_loss']:.3g}")

        curve.add(timesteps, finished_returns[-100:])
        if on_update is not None:
            on_update(timesteps, net)

    return net, curve
