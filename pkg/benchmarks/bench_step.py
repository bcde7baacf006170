"""Throughput comparison of the compiled and pure-Python step kernels.

Run: python3 benchmarks/bench_step.py [--steps N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from coopkitchen.core.engine import kernel_module
from coopkitchen.core.layout import canonical_layouts
from coopkitchen.core.types import DEFAULT_CONFIG, Action, initial_state


def bench_kernel(name: str, steps: int, seed: int = 0) -> dict:
    kernel = kernel_module(name)
    rng = np.random.default_rng(seed)
    results = {}
    for layout in canonical_layouts().values():
        state = initial_state(layout)
        actions = rng.integers(0, 6, size=(steps, 2))
        tiles = layout.tiles
        pot_index = layout.pot_index
        start = time.perf_counter()
        for i in range(steps):
            if state.tick >= DEFAULT_CONFIG.horizon:
                state = initial_state(layout)
            kernel.step_kernel(
                tiles, pot_index,
                state.positions, state.orientations, state.held,
                state.pot_onions, state.pot_timer, state.counters,
                int(actions[i, 0]), int(actions[i, 1]),
                DEFAULT_CONFIG.pot_capacity, DEFAULT_CONFIG.cook_time,
                DEFAULT_CONFIG.soup_reward,
            )
            state.tick += 1
        elapsed = time.perf_counter() - start
        results[layout.name] = steps / elapsed
    return results


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=100_000)
    args = parser.parse_args()

    rows = {}
    for name in ("python", "cython"):
        try:
            rows[name] = bench_kernel(name, args.steps)
        except ImportError as exc:
            print(f"{name} kernel unavailable: {exc}")

    layouts = list(next(iter(rows.values())))
    width = max(len(n) for n in layouts) + 2
    header = "layout".ljust(width) + "".join(k.rjust(16) for k in rows)
    if len(rows) == 2:
        header += "speedup".rjust(12)
    print(header)
    print("-" * len(header))
    for layout_name in layouts:
        line = layout_name.ljust(width)
        vals = [rows[k][layout_name] for k in rows]
        for v in vals:
            line += f"{v/1000:,.0f}k/s".rjust(16)
        if len(vals) == 2:
            line += f"{vals[1]/vals[0]:.2f}x".rjust(12)
        print(line)


if __name__ == "__main__":
    main()
