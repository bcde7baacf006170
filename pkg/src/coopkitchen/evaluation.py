"""Evaluation harness: paired rollouts, the unseen-teammate report table, and
the statistics used on play-study outcomes (Welch t-test, preference rates,
per-participant Likert normalization)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .agents.policies import Policy
from .core.engine import step_inplace
from .core.layout import load_bundled_layout, load_modified_layout
from .core.types import DEFAULT_CONFIG, KitchenConfig, Layout, initial_state


class DegenerateVariance(Exception):
    pass


@dataclass
class PairingSpec:
    agent_a: Policy
    agent_b: Policy
    layout: Layout
    trials: int = 10
    seat_policy: str = "alternate"  # alternate | fixed_a_first
    kitchen: KitchenConfig = DEFAULT_CONFIG


def run_pairing(spec: PairingSpec, rng: np.random.Generator) -> list[int]:
    """Episode scores for `trials` rollouts; agent A takes seat 0 on even
    trials under the default alternation policy."""
    scores = []
    for trial in range(spec.trials):
        if spec.seat_policy == "alternate":
            a_seat = trial % 2
        else:
            a_seat = 0
        seats = [None, None]
        seats[a_seat] = spec.agent_a.session(spec.layout, a_seat)
        seats[1 - a_seat] = spec.agent_b.session(spec.layout, 1 - a_seat)
        state = initial_state(spec.layout)
        for _ in range(spec.kitchen.horizon):
            acts = (seats[0].act(state, rng), seats[1].act(state, rng))
            step_inplace(state, acts, spec.layout, spec.kitchen)
        scores.append(int(state.score))
    return scores


TEAMMATE_KINDS = ("unseen_selfplay", "proxy", "random")


@dataclass
class EvalRow:
    layout: str
    modified: bool
    scores_by_teammate: dict  # teammate kind -> (mean, se) across agent seeds

    def label(self) -> str:
        return f"~{self.layout}" if self.modified else self.layout


@dataclass
class EvalReport:
    """Per-layout rows (original pairings with each teammate, then modified
    layouts with self-pairing) plus average rows."""

    rows: list[EvalRow] = field(default_factory=list)
    teammates: tuple = TEAMMATE_KINDS

    def _blocks(self) -> list[list[EvalRow]]:
        # original-layout rows and modified (self-paired) rows have
        # different teammate columns, so render them as separate blocks
        blocks: list[list[EvalRow]] = []
        for row in self.rows:
            if blocks and list(blocks[-1][0].scores_by_teammate) == list(
                row.scores_by_teammate
            ):
                blocks[-1].append(row)
            else:
                blocks.append([row])
        return blocks

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as f:
            f.write("layout,teammate,mean,se\n")
            for row in self.rows:
                for c, (m, se) in row.scores_by_teammate.items():
                    f.write(f"{row.label()},{c},{m},{se}\n")

    def to_text(self) -> str:
        width = max([len(r.label()) for r in self.rows] + [len("layout")]) + 2
        lines = []
        for block in self._blocks():
            cols = list(block[0].scores_by_teammate)
            header = "layout".ljust(width) + "".join(c.rjust(22) for c in cols)
            lines += [header, "-" * len(header)]
            for row in block:
                cells = [
                    f"{m:.1f} ± {se:.1f}".rjust(22)
                    for m, se in row.scores_by_teammate.values()
                ]
                lines.append(row.label().ljust(width) + "".join(cells))
            lines.append("")
        return "\n".join(lines).rstrip()


def _stable_tag(name: str) -> int:
    # str.hash is salted per process; reports must be seed-deterministic
    import zlib

    return zlib.crc32(name.encode()) & 0xFFFF


def _mean_se(per_seed_means: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(per_seed_means, dtype=np.float64)
    se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return float(arr.mean()), se


def unseen_agent_suite(
    agents_by_seed: Sequence[Policy],
    teammates: dict,
    layout_names: Sequence[str],
    trials: int = 10,
    seed: int = 0,
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> EvalReport:
    """Scores each trained agent (one per training seed) beside held-out
    teammates on the original layouts, and beside a copy of itself on each
    modified layout. Reported mean/SE are across training seeds, not trials.

    `teammates` maps kind -> either a Policy or {layout_name: Policy}.
    """
    rows: list[EvalRow] = []
    kinds = list(teammates)

    def teammate_for(kind: str, layout_name: str) -> Policy:
        t = teammates[kind]
        return t[layout_name] if isinstance(t, dict) else t

    def agent_for(agent, layout_name: str) -> Policy:
        return agent[layout_name] if isinstance(agent, dict) else agent

    for modified in (False, True):
        block: list[EvalRow] = []
        for name in layout_names:
            layout = (load_modified_layout(name) if modified
                      else load_bundled_layout(name))
            scores_by_teammate = {}
            if modified:
                per_seed = []
                for i, agent in enumerate(agents_by_seed):
                    a = agent_for(agent, name)
                    spec = PairingSpec(a, a, layout, trials, kitchen=kitchen)
                    rng = np.random.default_rng((seed, i, _stable_tag(name)))
                    per_seed.append(float(np.mean(run_pairing(spec, rng))))
                scores_by_teammate["self"] = _mean_se(per_seed)
            else:
                for kind in kinds:
                    per_seed = []
                    for i, agent in enumerate(agents_by_seed):
                        a = agent_for(agent, name)
                        spec = PairingSpec(a, teammate_for(kind, name), layout,
                                           trials, kitchen=kitchen)
                        rng = np.random.default_rng(
                            (seed, i, kinds.index(kind), _stable_tag(name)))
                        per_seed.append(float(np.mean(run_pairing(spec, rng))))
                    scores_by_teammate[kind] = _mean_se(per_seed)
            block.append(EvalRow(name, modified, scores_by_teammate))
        avg = {
            c: (float(np.mean([r.scores_by_teammate[c][0] for r in block])),
                float(np.mean([r.scores_by_teammate[c][1] for r in block])))
            for c in block[0].scores_by_teammate
        }
        block.append(EvalRow("average", modified, avg))
        rows.extend(block)
    return EvalReport(rows, tuple(kinds))


def welch_t_test(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Two-sided Welch (unequal variance) t-test. Identical constant samples
    get p = 1 rather than NaN."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(xs) < 2 or len(ys) < 2:
        raise ValueError("need at least 2 observations per sample")
    if xs.std() == 0.0 and ys.std() == 0.0:
        if xs.mean() == ys.mean():
            return 0.0, 1.0
        raise DegenerateVariance(
            "both samples constant but unequal; t is unbounded"
        )
    t, p = stats.ttest_ind(xs, ys, equal_var=False)
    return float(t), float(p)


def preference_test(a_preferred: Sequence[bool]) -> tuple[float, float]:
    """Fraction of head-to-head rounds where A was preferred, with a
    one-sample t-test of the 0/1 outcomes against chance (0.5)."""
    if len(a_preferred) == 0:
        raise ValueError("no outcomes")
    outcomes = np.asarray(a_preferred, dtype=np.float64)
    percent = float(outcomes.mean() * 100.0)
    if outcomes.std() == 0.0:
        p = 1.0 if outcomes.mean() == 0.5 else 0.0
    else:
        _, p = stats.ttest_1samp(outcomes, 0.5)
        p = float(p)
    return percent, p


def likert_normalize(responses: Sequence[Sequence[float]]) -> list[list[float]]:
    """Center each participant's agreement scores (-3..3) at zero so
    between-participant calibration differences drop out."""
    out = []
    for participant in responses:
        arr = np.asarray(participant, dtype=np.float64)
        if arr.size == 0:
            raise ValueError("empty participant response list")
        if arr.min() < -3 or arr.max() > 3:
            raise ValueError("responses must lie in [-3, 3]")
        out.append((arr - arr.mean()).tolist())
    return out
