"""Per-trial cost measurement for the full learner stack.

Runs the doubling learner against freshly drawn uniform costs and times only
play() + update(); cost generation and loss bookkeeping happen off the
clock. The per-trial work is O(N log N) (the connection sort dominates), so
doubling N should raise the median per-trial time by a factor comfortably
under 2.6, and persistent learner state is a few arrays of length O(N).
"""
from __future__ import annotations

import time

import numpy as np

from .game import CostPair, GameConfig
from .learners import DoublingLearner


def bench_per_trial(n_values, horizon: int, seed: int = 0) -> list[dict]:
    """One row per site count: median/p90 per-trial milliseconds and
    persistent state size in bytes."""
    rows = []
    for n in n_values:
        n = int(n)
        cfg = GameConfig(n, int(horizon), 1.0, 1.0)
        learner = DoublingLearner(cfg)
        rng = np.random.default_rng(seed)
        cost_rng = np.random.default_rng(seed + 1)
        per_trial = np.empty(cfg.horizon)
        for t in range(cfg.horizon):
            costs = CostPair(cost_rng.uniform(0.0, 1.0, n), cost_rng.uniform(0.0, 1.0, n))
            t0 = time.perf_counter()
            learner.play(rng)
            learner.update(costs)
            per_trial[t] = time.perf_counter() - t0
        rows.append(
            {
                "n_sites": n,
                "median_ms": float(np.median(per_trial) * 1e3),
                "p90_ms": float(np.percentile(per_trial, 90) * 1e3),
                "state_bytes": int(learner.state_nbytes),
            }
        )
    return rows


def ratio_report(rows: list[dict]) -> list[dict]:
    """Consecutive-row ratios (time and state) for doubling-N sweeps."""
    out = []
    for prev, cur in zip(rows, rows[1:]):
        out.append(
            {
                "n_from": prev["n_sites"],
                "n_to": cur["n_sites"],
                "median_time_ratio": cur["median_ms"] / prev["median_ms"],
                "state_ratio": cur["state_bytes"] / prev["state_bytes"],
            }
        )
    return out
