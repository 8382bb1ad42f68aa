"""Cost-sequence sources: adversarial, synthetic, and replayed.

The killer construction (unit cost ranges) defeats every deterministic
learner: opening costs sit at 1/sqrt(N) everywhere, and whenever the
learner's known action X is small (|X| <= sqrt(N)) the connection costs are
1 exactly on X and 0 elsewhere, so the learner pays at least 1 per trial
while some fixed singleton averages at most 2/sqrt(N). Against a randomized
learner the action cannot be known in advance; the source then adapts to the
realized previous action instead.

Synthetic kinds: "iid" (uniform costs each trial) and "drift" (sites on the
unit square with a random-walking user; connection cost is the scaled
distance, opening costs follow per-site clamped random walks). Replay reads
a trace CSV with header t,c_1..c_N,d_1..d_N.
"""
from __future__ import annotations

import csv
import math
import re

import numpy as np

from .errors import ConfigError, TraceFormatError
from .game import CostPair, GameConfig, SiteSet

SCENARIO_KINDS = ("killer", "iid", "drift", "replay")


def killer_costs(n_sites: int, prev_action: SiteSet | None) -> CostPair:
    """One adaptive trial against unit cost ranges (C = D = 1)."""
    if n_sites < 1:
        raise ConfigError(f"n_sites must be >= 1, got {n_sites!r}")
    opening = np.full(n_sites, 1.0 / math.sqrt(n_sites))
    connection = np.zeros(n_sites)
    if prev_action is not None and len(prev_action) <= math.sqrt(n_sites):
        if prev_action.members[-1] > n_sites:
            raise ConfigError(f"action {prev_action.members} outside 1..{n_sites}")
        connection[prev_action.index_array()] = 1.0
    return CostPair(opening, connection)


class SequenceSource:
    """Fixed pre-materialized cost sequence; ignores the learner's actions."""

    adaptive = False

    def __init__(self, costs: list[CostPair]):
        if not costs:
            raise ConfigError("cost sequence must be nonempty")
        self._costs = list(costs)

    def __len__(self) -> int:
        return len(self._costs)

    def costs_for(self, trial: int, action: SiteSet) -> CostPair:
        return self._costs[trial - 1]


class KillerSource:
    """Adaptive source. With use_current_action=True (deterministic learners
    only) each trial's costs are built from the action just played, i.e. the
    adversary moves second; otherwise from the realized previous action."""

    adaptive = True

    def __init__(self, n_sites: int, use_current_action: bool):
        self.n_sites = n_sites
        self.use_current_action = use_current_action
        self._prev: SiteSet | None = None

    def costs_for(self, trial: int, action: SiteSet) -> CostPair:
        basis = action if self.use_current_action else self._prev
        self._prev = action
        return killer_costs(self.n_sites, basis)


def generate_scenario(
    kind: str, cfg: GameConfig, seed: int, drift_step: float = 0.05
) -> list[CostPair]:
    """Materialize a full cost sequence for a non-adaptive scenario kind."""
    rng = np.random.default_rng(seed)
    n, t = cfg.n_sites, cfg.horizon
    if kind == "iid":
        return [
            CostPair(rng.uniform(0.0, cfg.opening_max, n), rng.uniform(0.0, cfg.connection_max, n))
            for _ in range(t)
        ]
    if kind == "drift":
        if drift_step < 0:
            raise ConfigError(f"drift step must be >= 0, got {drift_step!r}")
        sites = rng.uniform(0.0, 1.0, (n, 2))
        user = rng.uniform(0.0, 1.0, 2)
        opening = rng.uniform(0.0, cfg.opening_max, n)
        out = []
        for _ in range(t):
            dist = np.hypot(sites[:, 0] - user[0], sites[:, 1] - user[1])
            connection = np.clip(cfg.connection_max * dist / math.sqrt(2.0), 0.0, cfg.connection_max)
            out.append(CostPair(opening.copy(), connection))
            user = np.clip(user + rng.normal(0.0, drift_step, 2), 0.0, 1.0)
            opening = np.clip(
                opening + rng.normal(0.0, drift_step * cfg.opening_max, n), 0.0, cfg.opening_max
            )
        return out
    if kind == "killer":
        raise ConfigError("killer is adaptive; build a KillerSource instead")
    raise ConfigError(f"unknown scenario kind {kind!r}; known: {', '.join(SCENARIO_KINDS)}")


_HEADER_RE = re.compile(r"^(c|d)_(\d+)$")


def _parse_header(fields: list[str], path: str) -> int:
    bad = TraceFormatError(
        f"{path}, line 1: header must be t,c_1..c_N,d_1..d_N, got {','.join(fields)!r}"
    )
    if len(fields) < 3 or len(fields) % 2 == 0 or fields[0] != "t":
        raise bad
    n = (len(fields) - 1) // 2
    for j in range(n):
        if fields[1 + j] != f"c_{j + 1}" or fields[1 + n + j] != f"d_{j + 1}":
            raise bad
    return n


def load_trace(path: str, cfg: GameConfig | None = None) -> list[CostPair]:
    """Read a trace CSV; every complaint names its line (and field)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh)]
    rows = [row for row in rows if row]  # ignore blank trailing lines
    if not rows:
        raise TraceFormatError(f"{path}: no trials")
    n = _parse_header(rows[0], path)
    if cfg is not None and n != cfg.n_sites:
        raise TraceFormatError(f"{path}: trace has {n} sites, config expects {cfg.n_sites}")
    if len(rows) == 1:
        raise TraceFormatError(f"{path}: no trials")
    names = rows[0]
    out = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 2 * n + 1:
            raise TraceFormatError(
                f"{path}, line {line_no}: expected {2 * n + 1} fields, got {len(row)}"
            )
        expected_t = line_no - 1
        if row[0].strip() != str(expected_t):
            raise TraceFormatError(
                f"{path}, line {line_no}: trial index {row[0]!r}, expected {expected_t}"
            )
        values = np.empty(2 * n)
        for j, cell in enumerate(row[1:]):
            try:
                values[j] = float(cell)
            except ValueError:
                raise TraceFormatError(
                    f"{path}, line {line_no}, field {names[1 + j]}: not a number: {cell!r}"
                ) from None
        opening, connection = values[:n], values[n:]
        for vec, bound, prefix in (
            (opening, None if cfg is None else cfg.opening_max, "c"),
            (connection, None if cfg is None else cfg.connection_max, "d"),
        ):
            if not np.all(np.isfinite(vec)):
                j = int(np.argmin(np.isfinite(vec)))
                raise TraceFormatError(
                    f"{path}, line {line_no}, field {prefix}_{j + 1}: not finite"
                )
            if vec.min() < 0:
                j = int(np.argmin(vec))
                raise TraceFormatError(
                    f"{path}, line {line_no}, field {prefix}_{j + 1}: negative cost {vec[j]}"
                )
            if bound is not None and vec.max() > bound:
                j = int(np.argmax(vec))
                raise TraceFormatError(
                    f"{path}, line {line_no}, field {prefix}_{j + 1}: cost {vec[j]} exceeds bound {bound}"
                )
        out.append(CostPair(opening, connection))
    if cfg is not None and len(out) != cfg.horizon:
        raise TraceFormatError(f"{path}: trace has {len(out)} trials, config expects {cfg.horizon}")
    return out


def save_trace(path: str, costs: list[CostPair]) -> None:
    """Write the trace CSV format load_trace reads (17 significant digits)."""
    if not costs:
        raise ConfigError("cost sequence must be nonempty")
    n = costs[0].n_sites
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"c_{i + 1}" for i in range(n)] + [f"d_{i + 1}" for i in range(n)])
        for t, cp in enumerate(costs, start=1):
            if cp.n_sites != n:
                raise ConfigError(f"trial {t} has {cp.n_sites} sites, expected {n}")
            writer.writerow(
                [str(t)]
                + [format(v, ".17g") for v in cp.opening]
                + [format(v, ".17g") for v in cp.connection]
            )
