"""Command-line interface tests driven through click's CliRunner.

Exit-code contract: usage errors exit 2, runtime failures exit 1 with a
single `ExceptionType: message` line on stderr.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

import torch

from coopkitchen.agents.checkpoint import save_checkpoint
from coopkitchen.agents.neural import ActorCriticNet, NetworkSpec, NeuralPolicy
from coopkitchen.agents.policies import RandomPolicy
from coopkitchen.cli import main
from coopkitchen.core.layout import (
    load_bundled_layout,
    load_layout_file,
    render_layout,
)
from coopkitchen.core.replay import write_replay_log
from coopkitchen.core.types import Action
from coopkitchen.observations import EncoderConfig
from coopkitchen.training.bc import record_trajectories


@pytest.fixture
def runner():
    return CliRunner()


def make_flat_checkpoint(path: Path, layout_name="cramped_room", seed=0):
    layout = load_bundled_layout(layout_name)
    enc = EncoderConfig()
    torch.manual_seed(seed)
    net = ActorCriticNet(NetworkSpec(enc.obs_dim(layout), 16, 6))
    save_checkpoint(NeuralPolicy(net, enc, policy_id=f"cli-{seed}"), path)
    return path


class TestUsageErrors:
    def test_train_requires_config(self, runner):
        result = runner.invoke(main, ["train"])
        assert result.exit_code == 2
        assert "--config" in result.output

    def test_eval_requires_bundle(self, runner):
        result = runner.invoke(main, ["eval", "--layouts", "cramped_room",
                                      "--teammates", "random", "--out", "x.csv"])
        assert result.exit_code == 2

    def test_replay_requires_existing_log(self, runner, tmp_path):
        result = runner.invoke(main, ["replay", "--log",
                                      str(tmp_path / "nope.jsonl")])
        assert result.exit_code == 2

    def test_perturb_rejects_malformed_swap_token(self, runner):
        result = runner.invoke(
            main, ["perturb", "--layout", "cramped_room",
                   "--swap", "banana", "0,0"])
        assert result.exit_code == 2
        assert "row,col" in result.output

    def test_unknown_subcommand(self, runner):
        result = runner.invoke(main, ["frobnicate"])
        assert result.exit_code == 2


class TestRuntimeErrors:
    def test_eval_missing_checkpoint_exits_1(self, runner, tmp_path):
        result = runner.invoke(
            main, ["eval", "--bundle", str(tmp_path / "missing.ckpt"),
                   "--teammates", "random", "--layouts", "cramped_room",
                   "--out", str(tmp_path / "out.csv")])
        assert result.exit_code == 1
        line = result.stderr.strip().splitlines()[-1]
        name, _, message = line.partition(": ")
        assert name and message  # "ExceptionType: message" shape

    def test_perturb_swap_of_player_start_exits_1(self, runner):
        # cramped_room row 1 holds both player starts
        result = runner.invoke(
            main, ["perturb", "--layout", "cramped_room",
                   "--swap", "1,1", "0,0"])
        assert result.exit_code == 1
        assert result.stderr.startswith("InvalidSwap:")

    def test_perturb_identical_cells_exits_1(self, runner):
        result = runner.invoke(
            main, ["perturb", "--layout", "cramped_room",
                   "--swap", "0,0", "0,0"])
        assert result.exit_code == 1
        assert "InvalidSwap" in result.stderr

    def test_serve_with_bad_checkpoint_exits_1(self, runner, tmp_path):
        result = runner.invoke(
            main, ["serve", "--agent", str(tmp_path / "missing.ckpt")])
        assert result.exit_code == 1
        assert result.stderr.startswith("CheckpointLoadFailure:")

    def test_train_bad_config_exits_1(self, runner, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"variant": "time_travel"}))
        result = runner.invoke(main, ["train", "--config", str(cfg)])
        assert result.exit_code == 1
        assert result.stderr.startswith("BadTrainingConfig:")

    def test_bc_import_malformed_raw_exits_1(self, runner, tmp_path):
        raw = tmp_path / "raw.json"
        raw.write_text(json.dumps({"this is": "not a trajectory list"}))
        result = runner.invoke(
            main, ["bc-import", "--raw", str(raw),
                   "--out", str(tmp_path / "ds")])
        assert result.exit_code == 1
        assert ": " in result.stderr


class TestReplayCommand:
    def test_replay_reports_final_score(self, runner, tmp_path):
        layout = load_bundled_layout("cramped_room")
        rng = np.random.default_rng(3)
        actions = [tuple(Action(a) for a in rng.integers(0, 6, 2))
                   for _ in range(25)]
        log = tmp_path / "round.replay.jsonl"
        write_replay_log(log, layout.name, 3, actions)
        result = runner.invoke(main, ["replay", "--log", str(log)])
        assert result.exit_code == 0
        assert "final score: 0 after 25 ticks" in result.output

    def test_replay_text_render_prints_boards(self, runner, tmp_path):
        layout = load_bundled_layout("cramped_room")
        log = tmp_path / "round.replay.jsonl"
        write_replay_log(log, layout.name, 0,
                         [(Action.STAY, Action.STAY)] * 3)
        result = runner.invoke(main, ["replay", "--log", str(log),
                                      "--render", "text"])
        assert result.exit_code == 0
        # one board per tick plus the start state
        assert result.output.count("tick ") == 4
        assert "XXPXX" in result.output
        assert "final score:" in result.output


class TestPerturbCommand:
    def test_prints_swapped_grid(self, runner):
        layout = load_bundled_layout("cramped_room")
        result = runner.invoke(
            main, ["perturb", "--layout", "cramped_room",
                   "--swap", "0,2", "0,3"])
        assert result.exit_code == 0
        rows = result.output.splitlines()
        assert len(rows) == layout.height
        assert rows[0][2] != "P" or rows[0][3] != "P"

    def test_writes_layout_directory(self, runner, tmp_path):
        out = tmp_path / "perturbed"
        result = runner.invoke(
            main, ["perturb", "--layout", "cramped_room",
                   "--swap", "0,2", "0,3", "--out", str(out)])
        assert result.exit_code == 0
        written = result.output.split()[-1]
        loaded = load_layout_file(written)
        original = load_bundled_layout("cramped_room")
        assert render_layout(loaded) != render_layout(original)


class TestEvalCommand:
    def test_eval_writes_csv_and_table(self, runner, tmp_path):
        bundle = make_flat_checkpoint(tmp_path / "agent.ckpt")
        out = tmp_path / "report.csv"
        result = runner.invoke(
            main, ["eval", "--bundle", str(bundle),
                   "--teammates", "random",
                   "--layouts", "cramped_room",
                   "--trials", "2", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert out.exists()
        lines = out.read_text().splitlines()
        # header + per-teammate rows for layout, average, and both modified
        assert lines[0].startswith("layout")
        assert any(line.startswith("~cramped_room") for line in lines[1:])
        assert "cramped_room" in result.output

    def test_eval_teammate_checkpoint_spec(self, runner, tmp_path):
        bundle = make_flat_checkpoint(tmp_path / "agent.ckpt", seed=0)
        mate = make_flat_checkpoint(tmp_path / "mate.ckpt", seed=7)
        out = tmp_path / "report.csv"
        result = runner.invoke(
            main, ["eval", "--bundle", str(bundle),
                   "--teammates", f"unseen_selfplay={mate}",
                   "--layouts", "cramped_room",
                   "--trials", "1", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "unseen_selfplay" in out.read_text()

    def test_eval_teammate_spec_without_source_is_usage_error(
            self, runner, tmp_path):
        bundle = make_flat_checkpoint(tmp_path / "agent.ckpt")
        result = runner.invoke(
            main, ["eval", "--bundle", str(bundle),
                   "--teammates", "unseen_selfplay",
                   "--layouts", "cramped_room",
                   "--out", str(tmp_path / "r.csv")])
        assert result.exit_code == 2
        assert "needs =checkpoint" in result.output


class TestTrainCommand:
    def test_tiny_bcp_run_saves_checkpoint(self, runner, tmp_path):
        cfg = {
            "variant": "bcp",
            "layouts": ["cramped_room"],
            "out_dir": str(tmp_path / "run"),
            "hidden_dim": 16,
            "bc_partner": "scripted",
            "ppo": {
                "total_timesteps": 256,
                "rollout_length": 64,
                "n_envs": 2,
                "minibatch_size": 64,
                "epochs_per_update": 1,
            },
        }
        path = tmp_path / "train.json"
        path.write_text(json.dumps(cfg))
        result = runner.invoke(main, ["train", "--config", str(path)])
        assert result.exit_code == 0, result.output
        saved = list((tmp_path / "run").glob("*.ckpt"))
        assert saved, "expected a checkpoint in the output directory"


class TestBcImportCommand:
    def test_round_trip_import(self, runner, tmp_path):
        layout = load_bundled_layout("cramped_room")
        data = record_trajectories((RandomPolicy(), RandomPolicy()), layout,
                                   n_episodes=1, seed=5)
        raw = [
            {
                "layout": layout.name,
                "states": [s.to_dict() for s, _ in ep],
                "joint_actions": [[int(a), int(b)] for _, (a, b) in ep],
            }
            for ep in data.episodes
        ]
        raw_path = tmp_path / "raw.json"
        raw_path.write_text(json.dumps(raw))
        out = tmp_path / "dataset"
        result = runner.invoke(main, ["bc-import", "--raw", str(raw_path),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "imported 1 episodes" in result.output
        assert out.exists()
