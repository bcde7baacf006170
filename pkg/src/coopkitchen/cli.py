"""Command-line entry point: train, eval, replay, perturb, serve, bc-import.

Usage errors exit with status 2 (click's default); runtime failures print the
error to stderr and exit with status 1.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np


def _fail(exc: BaseException) -> None:
    click.echo(f"{type(exc).__name__}: {exc}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Two-player cooperative kitchen: training, evaluation, and play."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="TOML or JSON training configuration.")
def train(config_path: str):
    """Run a training job described by a config file."""
    from .training import (
        TrajectoryDataset,
        build_population,
        load_training_config,
        train_bc,
        train_variant,
    )
    from .agents.checkpoint import load_population_manifest, save_checkpoint
    from .agents.policies import ScriptedGreedyPolicy
    from .core.layout import load_bundled_layout

    try:
        cfg = load_training_config(config_path)
        layouts = [load_bundled_layout(n) for n in cfg.layouts]
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        if cfg.variant == "selfplay_population":
            manifest = build_population(layouts, out_dir, cfg.ppo)
            click.echo(f"population manifest: {manifest}")
            return
        if cfg.variant == "bc":
            dataset = TrajectoryDataset.load(cfg.bc_dataset)
            result = train_bc(dataset, layouts[0], hidden_dim=cfg.hidden_dim,
                              epochs=cfg.bc_epochs, seed=cfg.seed)
            save_checkpoint(result.proxy, out_dir / "bc-proxy.ckpt")
            save_checkpoint(result.bc, out_dir / "bc-teammate.ckpt")
            click.echo(f"proxy score {result.proxy_score:.1f}, "
                       f"bc score {result.bc_score:.1f} -> {out_dir}")
            return

        if cfg.variant in ("bcp", "ha2_bcp"):
            if cfg.bc_partner == "scripted":
                partners = [ScriptedGreedyPolicy()]
            else:
                from .agents.checkpoint import load_checkpoint

                partners = [load_checkpoint(cfg.bc_partner)]
        else:
            population = load_population_manifest(cfg.population_manifest)
            partners = population.load_handles(layouts[0])
        extra = {}
        if cfg.variant in ("bcp", "fcp") and cfg.encoder_config() is not None:
            extra["encoder"] = cfg.encoder_config()
        if cfg.variant.startswith("ha2"):
            extra["worker_share"] = cfg.worker_share
        result = train_variant(cfg.variant, partners, layouts, cfg.ppo,
                               hidden_dim=cfg.hidden_dim, **extra)
        path = result.save(out_dir)
        click.echo(f"saved {cfg.variant} checkpoint: {path}")
    except SystemExit:
        raise
    except Exception as exc:
        _fail(exc)


@main.command("eval")
@click.option("--bundle", "bundles", multiple=True, required=True,
              type=click.Path(dir_okay=False),
              help="Agent checkpoint; repeat for multiple training seeds.")
@click.option("--teammates", "teammate_specs", multiple=True, required=True,
              help="kind=source pairs; kinds unseen_selfplay/proxy take a "
                   "checkpoint path, random/scripted_greedy need no source.")
@click.option("--layouts", "layout_names", multiple=True, required=True)
@click.option("--trials", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def eval_cmd(bundles, teammate_specs, layout_names, trials, seed, out_path):
    """Score agents beside held-out teammates; writes a CSV and prints a table."""
    from .agents.checkpoint import load_checkpoint
    from .agents.policies import RandomPolicy, ScriptedGreedyPolicy
    from .evaluation import unseen_agent_suite

    try:
        agents = [load_checkpoint(b) for b in bundles]
        teammates = {}
        for spec in teammate_specs:
            kind, _, source = spec.partition("=")
            if kind == "random":
                teammates[kind] = RandomPolicy()
            elif kind == "scripted_greedy":
                teammates[kind] = ScriptedGreedyPolicy()
            elif source:
                teammates[kind] = load_checkpoint(source)
            else:
                raise click.UsageError(f"teammate {kind!r} needs =checkpoint")
        report = unseen_agent_suite(agents, teammates, list(layout_names),
                                    trials=trials, seed=seed)
        report.to_csv(out_path)
        click.echo(report.to_text())
        click.echo(f"\nwrote {out_path}")
    except click.UsageError:
        raise
    except SystemExit:
        raise
    except Exception as exc:
        _fail(exc)


@main.command()
@click.option("--log", "log_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--render", type=click.Choice(["none", "text"]), default="none",
              show_default=True)
def replay(log_path: str, render: str):
    """Re-simulate a recorded round; optionally print each board state."""
    from .core.engine import step_inplace
    from .core.layout import load_bundled_layout, render_state
    from .core.replay import read_replay_log
    from .core.types import initial_state

    try:
        header, actions = read_replay_log(log_path)
        layout = load_bundled_layout(header["layout"])
        state = initial_state(layout)
        if render == "text":
            click.echo(render_state(state, layout))
        for joint in actions:
            step_inplace(state, joint, layout)
            if render == "text":
                click.echo(render_state(state, layout))
        click.echo(f"final score: {state.score} after {state.tick} ticks")
    except SystemExit:
        raise
    except Exception as exc:
        _fail(exc)


@main.command()
@click.option("--layout", "layout_name", required=True)
@click.option("--swap", nargs=2, required=True,
              help="Two cells 'r,c r,c' whose tiles exchange.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="Write the perturbed layout files here instead of stdout.")
def perturb(layout_name, swap, out_dir):
    """Swap two tiles of a bundled layout and print or save the result."""
    from .core.layout import (
        load_bundled_layout,
        render_layout,
        save_layout_file,
        swap_tiles,
    )

    try:
        cells = []
        for token in swap:
            r, c = token.split(",")
            cells.append((int(r), int(c)))
    except ValueError:
        raise click.UsageError("--swap expects two 'row,col' cell tokens")
    try:
        layout = load_bundled_layout(layout_name)
        perturbed = swap_tiles(layout, cells[0], cells[1])
        if out_dir:
            path = save_layout_file(
                perturbed, out_dir,
                meta={"perturbation": {"swap": [list(cells[0]),
                                                list(cells[1])]}},
            )
            click.echo(f"wrote {path}")
        else:
            click.echo(render_layout(perturbed), nl=False)
    except SystemExit:
        raise
    except Exception as exc:
        _fail(exc)


@main.command()
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--layout", "layout_name", default="cramped_room", show_default=True)
@click.option("--agent", default="scripted_greedy", show_default=True,
              help="Checkpoint path or scripted_greedy/random.")
@click.option("--tick-ms", default=200, show_default=True)
@click.option("--human-seat", default=None, type=int,
              help="Pin the human seat (default: random per session).")
@click.option("--log-dir", default=None)
@click.option("--checkpoint-dir", default=None)
def serve(host, port, layout_name, agent, tick_ms, human_seat, log_dir,
          checkpoint_dir):
    """Run the websocket play service."""
    from .server import ServerConfig
    from .server import serve as run_server

    try:
        config = ServerConfig.from_env(
            host=host, port=port, layout_name=layout_name, agent=agent,
            tick_ms=tick_ms, human_seat=human_seat, log_dir=log_dir,
            checkpoint_dir=checkpoint_dir,
        )
        click.echo(f"serving {config.layout_name} with {config.agent} "
                   f"on {config.host}:{config.port}")
        run_server(config)
    except SystemExit:
        raise
    except Exception as exc:
        _fail(exc)


@main.command("bc-import")
@click.option("--raw", "raw_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def bc_import(raw_path, out_dir):
    """Convert raw trajectory JSON into a cloning dataset directory."""
    from .training.bc import import_raw_trajectories

    try:
        dataset = import_raw_trajectories(raw_path)
        dataset.save(out_dir)
        click.echo(f"imported {len(dataset)} episodes "
                   f"({dataset.n_timesteps()} timesteps) -> {out_dir}")
    except SystemExit:
        raise
    except Exception as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
