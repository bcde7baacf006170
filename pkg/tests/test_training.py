import numpy as np
import pytest
import torch

from coopkitchen.agents.neural import ActorCriticNet, NetworkSpec
from coopkitchen.agents.policies import RandomPolicy, ScriptedGreedyPolicy, StayPolicy
from coopkitchen.core.layout import parse_layout
from coopkitchen.core.types import Action, HeldObject, initial_state
from coopkitchen.observations import EncoderConfig
from coopkitchen.subtasks import SubTask, SubTaskMask
from coopkitchen.training.bc import (
    EmptyAfterFilter,
    SingleClassDegenerate,
    TrajectoryDataset,
    _samples,
    action_weights,
    fit_bc_net,
    import_raw_trajectories,
    record_trajectories,
    train_bc,
)
from coopkitchen.training.config import (
    BadTrainingConfig,
    TrainingConfig,
    load_training_config,
    save_training_config,
)
from coopkitchen.training.envs import (
    BanditEnv,
    MaskedActionChosen,
    ManagerEnv,
    NoFeasibleSubTask,
    PairedKitchenEnv,
    SubTaskUsageCounter,
    WorkerEnv,
    WorkerEnvConfig,
    counter_steps_saved,
    pot_bonus_applies,
    sample_subtask,
)
from coopkitchen.training.ppo import PpoConfig, compute_gae, ppo_loss, ppo_train
from coopkitchen.training.variants import (
    MixturePolicy,
    default_manager_encoder,
    default_worker_encoder,
)


def greedy_trace(net, obs_batch):
    with torch.no_grad():
        logits = net.logits(torch.from_numpy(obs_batch))
    return torch.argmax(logits, dim=-1).tolist()


class TestPpoCore:
    def test_bandit_solved_within_50k_steps(self):
        net = ActorCriticNet(NetworkSpec(BanditEnv.obs_dim, 16, 6))
        cfg = PpoConfig(total_timesteps=50_000, seed=0, rollout_length=64,
                        minibatch_size=256)
        ppo_train(lambda i: BanditEnv(), net, cfg)
        with torch.no_grad():
            logits = net.logits(torch.ones(BanditEnv.obs_dim))
        assert int(torch.argmax(logits)) == int(Action.INTERACT)

    def test_zero_timesteps_leaves_policy_untouched(self):
        torch.manual_seed(3)
        net = ActorCriticNet(NetworkSpec(BanditEnv.obs_dim, 16, 6))
        probe = np.random.default_rng(0).random((64, BanditEnv.obs_dim)).astype(
            np.float32)
        before = greedy_trace(net, probe)
        params_before = [p.detach().clone() for p in net.parameters()]
        cfg = PpoConfig(total_timesteps=0, seed=0)
        ppo_train(lambda i: BanditEnv(), net, cfg)
        assert greedy_trace(net, probe) == before
        for p, q in zip(net.parameters(), params_before):
            assert torch.equal(p, q)

    def test_loss_gradient_matches_finite_differences(self):
        torch.manual_seed(1)
        net = ActorCriticNet(NetworkSpec(2, 3, 2)).double()
        cfg = PpoConfig()
        rng = np.random.default_rng(2)
        obs = torch.from_numpy(rng.normal(size=(8, 2)))
        actions = torch.from_numpy(rng.integers(0, 2, size=8))
        adv = torch.from_numpy(rng.normal(size=8))
        ret = torch.from_numpy(rng.normal(size=8))
        with torch.no_grad():
            logits, _ = net(obs)
            old_logp = torch.log_softmax(logits, -1).gather(
                1, actions.unsqueeze(1)).squeeze(1)

        def loss_value():
            loss, _ = ppo_loss(net, obs, actions, old_logp, adv, ret, None, cfg)
            return loss

        def loss_scalar():
            with torch.no_grad():
                return float(loss_value())

        loss = loss_value()
        grads = torch.autograd.grad(loss, list(net.parameters()))
        eps = 1e-6
        for param, grad in zip(net.parameters(), grads):
            flat = param.data.view(-1)
            gflat = grad.view(-1)
            for j in range(flat.numel()):
                orig = float(flat[j])
                flat[j] = orig + eps
                hi = loss_scalar()
                flat[j] = orig - eps
                lo = loss_scalar()
                flat[j] = orig
                fd = (hi - lo) / (2 * eps)
                scale = max(abs(fd), abs(float(gflat[j])), 1e-8)
                assert abs(fd - float(gflat[j])) / scale < 1e-4

    def test_gae_matches_hand_computation(self):
        rewards = np.array([[1.0], [0.0], [2.0]], dtype=np.float32)
        values = np.array([[0.5], [0.25], [1.0]], dtype=np.float32)
        dones = np.array([[0.0], [1.0], [0.0]], dtype=np.float32)
        last = np.array([3.0], dtype=np.float32)
        gamma, lam = 0.9, 0.8
        # t=2: delta = 2 + 0.9*3 - 1 = 3.7 ; gae = 3.7
        # t=1 (done): delta = 0 - 0.25 = -0.25 ; gae = -0.25
        # t=0: delta = 1 + 0.9*0.25 - 0.5 = 0.725 ; gae = 0.725 + 0.72*(-0.25)
        adv, ret = compute_gae(rewards, values, dones, last, gamma, lam)
        expect = np.array([[0.725 + 0.72 * -0.25], [-0.25], [3.7]])
        assert np.allclose(adv, expect, atol=1e-6)
        assert np.allclose(ret, expect + values, atol=1e-6)


class TestSubTaskSampling:
    def _mask(self, tasks):
        mask = SubTaskMask()
        for t in tasks:
            mask.set(t)
        return mask

    def test_inverse_frequency_ratio(self):
        counter = SubTaskUsageCounter()
        a, b = SubTask.SERVE_SOUP, SubTask.PLACE_ONION_IN_POT
        for _ in range(9):
            counter.increment("l", b)
        mask = self._mask([a, b])
        rng = np.random.default_rng(0)
        draws = [sample_subtask(counter, "l", mask, rng) for _ in range(100_000)]
        n_a = sum(d == a for d in draws)
        n_b = len(draws) - n_a
        assert abs(n_a / n_b - 10.0) < 0.5

    def test_uniform_when_counts_equal(self):
        counter = SubTaskUsageCounter()
        tasks = [SubTask.SERVE_SOUP, SubTask.PLACE_ONION_IN_POT,
                 SubTask.PICKUP_DISH_FROM_DISPENSER]
        mask = self._mask(tasks)
        rng = np.random.default_rng(1)
        n = 60_000
        counts = {t: 0 for t in tasks}
        for _ in range(n):
            counts[sample_subtask(counter, "l", mask, rng)] += 1
        expected = n / 3
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2 < 13.8  # chi-square, 2 dof, 99.9th percentile

    def test_unknown_never_sampled_and_never_counted(self):
        counter = SubTaskUsageCounter()
        mask = self._mask([SubTask.SERVE_SOUP])
        rng = np.random.default_rng(2)
        for _ in range(500):
            assert sample_subtask(counter, "l", mask, rng) == SubTask.SERVE_SOUP
        with pytest.raises(ValueError):
            counter.increment("l", SubTask.UNKNOWN)

    def test_empty_mask_raises(self):
        with pytest.raises(NoFeasibleSubTask):
            sample_subtask(SubTaskUsageCounter(), "l", SubTaskMask(),
                           np.random.default_rng(0))


TWO_POT_GRID = "XOPPX\nD1 2X\nXXSXX"
CORRIDOR_GRID = "XXXXXXXDSX\nO1       X\nX2XXXXXPXX\nXXXXXXXXXX"

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3


def make_worker_env(layout, **cfg_kwargs):
    return WorkerEnv(
        layout, default_worker_encoder(), StayPolicy(), SubTaskUsageCounter(),
        config=WorkerEnvConfig(**cfg_kwargs),
    )


class TestWorkerRewardContract:
    def test_completion_pays_plus_one(self, cramped):
        env = make_worker_env(cramped)
        env.reset(np.random.default_rng(0))
        from coopkitchen.core.types import TileKind
        from coopkitchen.subtasks import adjacent_floor_cells
        disp = cramped.cells_of(TileKind.ONION_DISPENSER)[0]
        stand = adjacent_floor_cells(cramped, disp)[0]
        env.state.positions[0] = stand
        dr, dc = disp[0] - stand[0], disp[1] - stand[1]
        env.state.orientations[0] = {(-1, 0): UP, (1, 0): DOWN,
                                     (0, -1): LEFT, (0, 1): RIGHT}[(dr, dc)]
        env.assigned = SubTask.PICKUP_ONION_FROM_DISPENSER
        _, reward, done, _ = env.step(int(Action.INTERACT))
        assert done and reward == 1.0
        assert env.completions["completed"] == 1

    def test_wrong_interact_pays_minus_one(self, cramped):
        env = make_worker_env(cramped)
        env.reset(np.random.default_rng(0))
        from coopkitchen.core.types import TileKind
        from coopkitchen.subtasks import adjacent_floor_cells
        disp = cramped.cells_of(TileKind.ONION_DISPENSER)[0]
        stand = adjacent_floor_cells(cramped, disp)[0]
        env.state.positions[0] = stand
        dr, dc = disp[0] - stand[0], disp[1] - stand[1]
        env.state.orientations[0] = {(-1, 0): UP, (1, 0): DOWN,
                                     (0, -1): LEFT, (0, 1): RIGHT}[(dr, dc)]
        env.assigned = SubTask.PICKUP_DISH_FROM_DISPENSER
        _, reward, done, _ = env.step(int(Action.INTERACT))
        assert done and reward == -1.0
        assert env.completions["wrong"] == 1

    def test_timeout_pays_minus_one(self, cramped):
        env = make_worker_env(cramped, timeout=30)
        env.reset(np.random.default_rng(0))
        for t in range(30):
            _, reward, done, _ = env.step(int(Action.STAY))
            if t < 29:
                assert not done and reward == 0.0
        assert done and reward == -1.0
        assert env.completions["timeout"] == 1

    def test_pot_bonus_only_for_fullest_nonfull_pot(self):
        layout = parse_layout(TWO_POT_GRID, name="two_pot")
        pot_a, pot_b = (0, 2), (0, 3)
        env = make_worker_env(layout)
        env.reset(np.random.default_rng(0))
        env.state.positions[0] = (1, 2)
        env.state.orientations[0] = UP
        env.state.held[0] = int(HeldObject.ONION)
        env.state.pot_onions[int(layout.pot_index[pot_a])] = 2
        env.assigned = SubTask.PLACE_ONION_IN_POT
        _, reward, _, _ = env.step(int(Action.INTERACT))
        assert reward == pytest.approx(1.0 + 0.2)

        env2 = make_worker_env(layout)
        env2.reset(np.random.default_rng(0))
        env2.state.positions[0] = (1, 2)
        env2.state.orientations[0] = UP
        env2.state.held[0] = int(HeldObject.ONION)
        env2.assigned = SubTask.PLACE_ONION_IN_POT
        _, reward, _, _ = env2.step(int(Action.INTERACT))
        assert reward == pytest.approx(1.0)  # tied pots: no bonus

    def test_counter_shortcut_shaping_pays_per_step_saved(self):
        layout = parse_layout(CORRIDOR_GRID, name="corridor")
        env = make_worker_env(layout)
        env.reset(np.random.default_rng(0))
        env.state.positions[0] = (1, 1)
        env.state.positions[1] = (2, 1)
        env.state.orientations[0] = UP
        env.state.held[0] = int(HeldObject.ONION)
        env.assigned = SubTask.PLACE_ONION_ON_COUNTER
        # counter above is 0 steps away; the pot's standing cell is 6 away
        _, reward, done, _ = env.step(int(Action.INTERACT))
        assert done
        assert reward == pytest.approx(1.0 + 6 * 0.05)

    def test_shaping_helpers_directly(self):
        layout = parse_layout(CORRIDOR_GRID, name="corridor")
        s = initial_state(layout)
        s.positions[0] = (1, 1)
        s.positions[1] = (2, 1)
        assert counter_steps_saved(
            s, 0, (0, 1), SubTask.PLACE_ONION_ON_COUNTER, layout
        ) == 6
        # counter farther than the natural target: saving is clamped at zero
        far_counter = (0, 6)
        assert counter_steps_saved(
            s, 0, far_counter, SubTask.PLACE_ONION_ON_COUNTER, layout
        ) == 1  # pot stand is 6 away, this counter stand is 5
        assert counter_steps_saved(
            s, 0, (0, 8), SubTask.PLACE_ONION_ON_COUNTER, layout
        ) == 0  # farther than the pot: clamped

        two_pot = parse_layout(TWO_POT_GRID, name="two_pot")
        s2 = initial_state(two_pot)
        s2.pot_onions[int(two_pot.pot_index[(0, 2)])] = 2
        assert pot_bonus_applies(s2, (0, 2), two_pot)
        assert not pot_bonus_applies(s2, (0, 3), two_pot)

    def test_kitchen_persists_across_subtask_episodes(self, cramped):
        from coopkitchen.core.types import TileKind
        from coopkitchen.subtasks import adjacent_floor_cells
        env = make_worker_env(cramped)
        rng = np.random.default_rng(0)
        env.reset(rng)
        disp = cramped.cells_of(TileKind.ONION_DISPENSER)[0]
        stand = adjacent_floor_cells(cramped, disp)[0]
        env.state.positions[0] = stand
        env.state.orientations[0] = {(-1, 0): UP, (1, 0): DOWN,
                                     (0, -1): LEFT, (0, 1): RIGHT}[
            (disp[0] - stand[0], disp[1] - stand[1])]
        env.assigned = SubTask.PICKUP_ONION_FROM_DISPENSER
        _, _, done, _ = env.step(int(Action.INTERACT))
        assert done
        tick_before = env.state.tick
        held_before = int(env.state.held[0])
        env.reset(rng)
        assert env.state.tick == tick_before  # board carried over
        assert int(env.state.held[0]) == held_before == int(HeldObject.ONION)


class TestManagerEnv:
    def _env(self, layout, **kwargs):
        w_enc = default_worker_encoder()
        m_enc = default_manager_encoder()
        torch.manual_seed(0)
        w_net = ActorCriticNet(NetworkSpec(w_enc.obs_dim(layout), 16, 6))
        return ManagerEnv(layout, m_enc, w_net, w_enc, RandomPolicy(), **kwargs)

    def test_episode_is_horizon_decisions_and_reward_tracks_score(self, cramped):
        env = self._env(cramped)
        rng = np.random.default_rng(0)
        obs, mask = env.reset(rng)
        assert mask is not None and mask.shape == (12,)
        total = 0.0
        decisions = 0
        done = False
        while not done:
            feasible = np.flatnonzero(mask)
            a = int(rng.choice(feasible))
            obs, r, done, mask = env.step(a)
            total += r
            decisions += 1
        assert decisions == 400
        assert total == env.state.score
        assert total % 20 == 0

    def test_masked_choice_raises(self, cramped):
        env = self._env(cramped)
        rng = np.random.default_rng(0)
        _, mask = env.reset(rng)
        blocked = int(np.flatnonzero(mask == 0)[0])
        with pytest.raises(MaskedActionChosen):
            env.step(blocked)

    def test_unknown_is_always_available(self, cramped):
        env = self._env(cramped)
        _, mask = env.reset(np.random.default_rng(0))
        assert mask[int(SubTask.UNKNOWN)] == 1.0


class TestPairedEnv:
    def test_seats_alternate_and_partners_logged(self, cramped):
        partners = [RandomPolicy(), StayPolicy()]
        partners[0].id = "rand"
        partners[1].id = "stay"
        env = PairedKitchenEnv([cramped], EncoderConfig(), partners)
        rng = np.random.default_rng(0)
        egos = []
        for _ in range(6):
            env.reset(rng)
            egos.append(env.ego)
        assert egos == [0, 1, 0, 1, 0, 1]
        assert set(env.partner_log) <= {"rand", "stay"}
        assert len(env.partner_log) == 6


class TestMixturePolicy:
    def test_every_member_gets_sessions(self, cramped):
        members = [RandomPolicy() for _ in range(5)]
        for i, m in enumerate(members):
            m.id = f"m{i}"
        mix = MixturePolicy(members, seed=0)
        for _ in range(200):
            mix.session(cramped, 0)
        assert set(mix.sample_log) == {f"m{i}" for i in range(5)}


class TestBehaviorCloning:
    def test_joint_stay_timesteps_are_dropped(self, cramped):
        data = record_trajectories(
            (RandomPolicy(), RandomPolicy()), cramped, n_episodes=1, seed=0)
        from coopkitchen.core.types import DEFAULT_CONFIG
        xs, ys = _samples(data.episodes, cramped, DEFAULT_CONFIG)
        kept = [
            (s, a0, a1) for ep in data.episodes for s, (a0, a1) in ep
            if not (a0 == Action.STAY and a1 == Action.STAY)
        ]
        assert len(ys) == 2 * len(kept)
        n_stay_pairs = sum(
            1 for ep in data.episodes for _, (a0, a1) in ep
            if a0 == Action.STAY and a1 == Action.STAY
        )
        assert n_stay_pairs > 0  # the filter had something to remove

    def test_all_stay_dataset_rejected(self, cramped):
        data = record_trajectories(
            (StayPolicy(), StayPolicy()), cramped, n_episodes=1, seed=0)
        from coopkitchen.core.types import DEFAULT_CONFIG
        with pytest.raises(EmptyAfterFilter):
            _samples(data.episodes, cramped, DEFAULT_CONFIG)

    def test_class_weight_ratio(self):
        labels = np.array([0, 0, 1, 2], dtype=np.int64)
        w = action_weights(labels)
        assert w[1] == pytest.approx(2 * w[0])
        assert w[2] == pytest.approx(2 * w[0])
        assert w[3] == w[4] == w[5] == 0.0
        present = w[w > 0]
        assert present.mean() == pytest.approx(1.0)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassDegenerate):
            action_weights(np.zeros(10, dtype=np.int64))

    def test_net_memorizes_small_dataset(self, cramped):
        from coopkitchen.core.types import TileKind
        from coopkitchen.observations import encode_features, feature_vector_dim
        floors = [tuple(c) for c in np.argwhere(
            cramped.tiles == int(TileKind.FLOOR))]
        mate = tuple(map(int, initial_state(cramped).positions[1]))
        states = []
        for cell in floors:
            if cell == mate:
                continue
            s = initial_state(cramped)
            s.positions[0] = cell
            states.append(s)
        xs = np.stack([encode_features(s, cramped, 0) for s in states]).astype(
            np.float32)
        ys = np.arange(len(states), dtype=np.int64) % 3  # three classes
        net = fit_bc_net(xs, ys, feature_vector_dim(cramped), hidden_dim=64,
                         epochs=400, lr=3e-3, seed=0)
        with torch.no_grad():
            logits, _ = net(torch.from_numpy(xs))
            probs = torch.softmax(logits, -1)
        for i, y in enumerate(ys):
            assert float(probs[i, y]) > 0.99

    def test_raw_import_round_trip(self, cramped, tmp_path):
        import json
        data = record_trajectories(
            (RandomPolicy(), RandomPolicy()), cramped, n_episodes=2, seed=1)
        raw = [
            {
                "layout": cramped.name,
                "states": [s.to_dict() for s, _ in ep],
                "joint_actions": [[int(a0), int(a1)] for _, (a0, a1) in ep],
            }
            for ep in data.episodes
        ]
        path = tmp_path / "raw.json"
        path.write_text(json.dumps(raw))
        imported = import_raw_trajectories(path)
        assert imported.layout_name == cramped.name
        assert len(imported) == 2
        assert imported.episodes[0][5][0] == data.episodes[0][5][0]
        assert imported.episodes[1][17][1] == data.episodes[1][17][1]

    def test_dataset_save_load_round_trip(self, cramped, tmp_path):
        data = record_trajectories(
            (RandomPolicy(), StayPolicy()), cramped, n_episodes=1, seed=2)
        data.save(tmp_path / "ds")
        back = TrajectoryDataset.load(tmp_path / "ds")
        assert back.layout_name == data.layout_name
        assert back.n_timesteps() == data.n_timesteps()
        assert back.episodes[0][33] == data.episodes[0][33]


class TestTrainingConfig:
    def test_toml_round_trip(self, tmp_path):
        path = tmp_path / "train.toml"
        path.write_text(
            'variant = "ha2_bcp"\n'
            'layouts = ["cramped_room", "coordination_ring"]\n'
            "seed = 7\n"
            "worker_share = 0.25\n"
            "[ppo]\n"
            "total_timesteps = 1234\n"
            "[worker]\n"
            "timeout = 25\n"
        )
        cfg = load_training_config(path)
        assert cfg.variant == "ha2_bcp"
        assert cfg.layouts == ["cramped_room", "coordination_ring"]
        assert cfg.ppo.total_timesteps == 1234
        assert cfg.ppo.seed == 7  # top-level seed propagates
        assert cfg.worker.timeout == 25
        assert cfg.worker_share == 0.25

    def test_json_accepted(self, tmp_path):
        path = tmp_path / "train.json"
        path.write_text('{"variant": "bcp", "layouts": ["cramped_room"]}')
        assert load_training_config(path).variant == "bcp"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "train.toml"
        path.write_text('variant = "bcp"\nlayuots = ["cramped_room"]\n')
        with pytest.raises(BadTrainingConfig, match="layuots"):
            load_training_config(path)

    def test_unknown_variant_rejected(self):
        with pytest.raises(BadTrainingConfig):
            TrainingConfig(variant="dqn")

    def test_fcp_requires_population(self):
        with pytest.raises(BadTrainingConfig, match="population"):
            TrainingConfig(variant="fcp")

    def test_bc_requires_dataset(self):
        with pytest.raises(BadTrainingConfig, match="dataset"):
            TrainingConfig(variant="bc")

    def test_save_load_round_trip(self, tmp_path):
        cfg = TrainingConfig(variant="ha2_bcp", seed=3)
        save_training_config(cfg, tmp_path / "c.json")
        back = load_training_config(tmp_path / "c.json")
        assert back.variant == cfg.variant
        assert back.seed == cfg.seed
