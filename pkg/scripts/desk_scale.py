"""Desk-scale training run backing the regression thresholds in the
acceptance tests. Produces artifacts/desk_scale/results.json plus checkpoints
and learning curves.

Stages (all on cramped_room):
1. executor (worker): 2M steps of sub-task episodes beside a random teammate
2. selector (manager): 2M steps with the frozen executor, paired with itself
3. flat PPO baseline: 4M steps of self-play (same total budget) with an
   annealed event bonus so the sparse reward is discoverable; the bonus
   decays to zero before training ends and never appears in evaluation
4. evaluation: executor completion rate; hierarchical self-pair score on the
   original and perturbed layout; flat baseline ditto
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import numpy as np
import torch

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from coopkitchen.agents.checkpoint import save_checkpoint
from coopkitchen.agents.neural import ActorCriticNet, HierarchicalPolicy, NetworkSpec, NeuralPolicy
from coopkitchen.agents.policies import RandomPolicy
from coopkitchen.core.engine import step as engine_step
from coopkitchen.core.layout import load_bundled_layout, load_modified_layout
from coopkitchen.core.types import Action, DEFAULT_CONFIG, EventKind
from coopkitchen.evaluation import PairingSpec, run_pairing
from coopkitchen.training.envs import SelfPlayEnv, SubTaskUsageCounter, WorkerEnv
from coopkitchen.training.ppo import PpoConfig, ppo_train
from coopkitchen.training.variants import (
    default_flat_encoder,
    default_manager_encoder,
    default_worker_encoder,
    train_manager,
    train_worker,
)

OUT = Path(__file__).resolve().parent.parent / "artifacts" / "desk_scale"
WORKER_STEPS = 2_000_000
MANAGER_STEPS = 2_000_000
FLAT_STEPS = 4_000_000
SEED = 0


class ShapedSelfPlayEnv(SelfPlayEnv):
    """Self-play with an annealed event bonus for the flat baseline.

    Without it the flat policy never discovers the full soup cycle from the
    sparse serve reward at this budget. The bonus decays linearly to zero
    well before training ends, so the final policy optimizes the true game
    reward, and all evaluations use the unshaped game score.
    """

    BONUS = {
        EventKind.PLACE_ONION_IN_POT: 3.0,
        EventKind.PICKUP_DISH_FROM_DISPENSER: 3.0,
        EventKind.GET_SOUP_FROM_POT: 5.0,
    }

    def __init__(self, layouts, encoder, net, anneal_steps,
                 kitchen=DEFAULT_CONFIG):
        super().__init__(layouts, encoder, net, kitchen)
        self.anneal_steps = anneal_steps
        self.steps_seen = 0

    def step(self, action: int):
        mate_action = self.mate.act(self.state, self._rng)
        joint = [None, None]
        joint[self.ego] = Action(action)
        joint[1 - self.ego] = mate_action
        outcome = engine_step(self.state, tuple(joint), self.layout,
                              self.kitchen)
        self.state = outcome.next
        self.steps_seen += 1
        coef = max(0.0, 1.0 - self.steps_seen / self.anneal_steps)
        shaped = sum(self.BONUS.get(ev.kind, 0.0)
                     for ev in outcome.events if ev is not None)
        reward = float(outcome.reward) + coef * shaped
        done = self.state.tick >= self.kitchen.horizon
        return self.pipeline.encode(self.state, self.ego), reward, done, None


def measure_worker_completion(worker_net, layout, mode, n_episodes=1000, seed=123):
    """Fraction of sampled sub-tasks the executor completes before timeout
    (wrong interacts and timeouts both count as failures). mode "stochastic"
    samples from the policy distribution, matching how the executor acts in
    play; "greedy" takes the argmax."""
    encoder = default_worker_encoder()
    env = WorkerEnv(layout, encoder, RandomPolicy(), SubTaskUsageCounter())
    rng = np.random.default_rng(seed)
    obs, _ = env.reset(rng)
    done_episodes = 0
    while done_episodes < n_episodes:
        with torch.no_grad():
            logits = worker_net.logits(torch.from_numpy(obs))
        if mode == "greedy":
            action = int(torch.argmax(logits))
        else:
            probs = torch.softmax(logits, -1).numpy()
            action = int(rng.choice(len(probs), p=probs / probs.sum()))
        obs, _, done, _ = env.step(action)
        if done:
            done_episodes += 1
            obs, _ = env.reset(rng)
    total = sum(env.completions.values())
    return env.completions["completed"] / total, dict(env.completions)


def self_pair_scores(policy, layout, trials=10, seed=77):
    spec = PairingSpec(policy, policy, layout, trials=trials)
    return run_pairing(spec, np.random.default_rng(seed))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    layout = load_bundled_layout("cramped_room")
    perturbed = load_modified_layout("cramped_room")
    results = {"layout": "cramped_room", "seed": SEED,
               "budgets": {"worker": WORKER_STEPS, "manager": MANAGER_STEPS,
                           "flat": FLAT_STEPS}}
    t_start = time.time()

    print("[1/4] executor training", flush=True)
    ppo_w = PpoConfig(total_timesteps=WORKER_STEPS, seed=SEED,
                      entropy_coef_final=0.0005)
    worker_net, worker_curve, tallies = train_worker(
        layout, RandomPolicy(), ppo_w, hidden_dim=128)
    worker_curve.write_csv(OUT / "worker-curve.csv")
    results["worker_training_tallies"] = tallies
    for p in worker_net.parameters():
        p.requires_grad_(False)

    for mode in ("stochastic", "greedy"):
        completion, tally = measure_worker_completion(worker_net, layout, mode)
        results[f"worker_completion_rate_{mode}"] = completion
        results[f"worker_eval_tallies_{mode}"] = tally
        print(f"  completion rate ({mode}) {completion:.3f} {tally}", flush=True)

    print("[2/4] selector training (self-paired)", flush=True)
    ppo_m = PpoConfig(total_timesteps=MANAGER_STEPS, seed=SEED,
                      entropy_coef_final=0.0001, rollout_length=512,
                      epochs_per_update=6)
    manager_net, manager_curve = train_manager(layout, worker_net, "self", ppo_m,
                                               hidden_dim=128)
    manager_curve.write_csv(OUT / "manager-curve.csv")

    hier = HierarchicalPolicy(
        manager_net, default_manager_encoder(), worker_net,
        default_worker_encoder(), policy_id="ha2-desk",
    )
    save_checkpoint(hier, OUT / "ha2.ckpt")

    for mode in ("greedy", "stochastic"):
        hier.mode = mode
        orig = self_pair_scores(hier, layout)
        pert = self_pair_scores(hier, perturbed)
        results[f"ha2_{mode}"] = {
            "original_scores": orig, "perturbed_scores": pert,
            "original_mean": float(np.mean(orig)),
            "perturbed_mean": float(np.mean(pert)),
        }
        print(f"  ha2 {mode}: orig {np.mean(orig):.1f} pert {np.mean(pert):.1f}",
              flush=True)
    hier.mode = "stochastic"

    print("[3/4] flat self-play baseline", flush=True)
    encoder = default_flat_encoder()
    torch.manual_seed(SEED)
    flat_net = ActorCriticNet(NetworkSpec(encoder.obs_dim(layout), 128, 6))
    ppo_f = PpoConfig(total_timesteps=FLAT_STEPS, seed=SEED,
                      entropy_coef_final=0.001)
    anneal = int(0.8 * FLAT_STEPS / ppo_f.n_envs)
    flat_net, flat_curve = ppo_train(
        lambda i: ShapedSelfPlayEnv([layout], encoder, flat_net, anneal),
        flat_net, ppo_f)
    flat_curve.write_csv(OUT / "flat-curve.csv")
    flat = NeuralPolicy(flat_net, encoder, policy_id="flat-desk")
    save_checkpoint(flat, OUT / "flat.ckpt")

    print("[4/4] evaluation", flush=True)
    for mode in ("greedy", "stochastic"):
        flat.mode = mode
        orig = self_pair_scores(flat, layout)
        pert = self_pair_scores(flat, perturbed)
        results[f"flat_{mode}"] = {
            "original_scores": orig, "perturbed_scores": pert,
            "original_mean": float(np.mean(orig)),
            "perturbed_mean": float(np.mean(pert)),
        }
        print(f"  flat {mode}: orig {np.mean(orig):.1f} pert {np.mean(pert):.1f}",
              flush=True)

    results["elapsed_seconds"] = time.time() - t_start
    (OUT / "results.json").write_text(json.dumps(results, indent=2))
    print(f"done in {results['elapsed_seconds']/60:.1f} min -> {OUT}/results.json",
          flush=True)


if __name__ == "__main__":
    main()
