"""Domain types for the online facility location game.

Each trial an adversary fixes an opening-cost vector c in [0, C]^N and a
connection-cost vector d in [0, D]^N, the learner then commits to a nonempty
set X of sites, and pays

    loss(X) = sum_{i in X} c_i + min_{i in X} d_i.

Everything downstream (surrogate, learners, oracles) speaks these types.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError, InvalidActionError


@dataclass(frozen=True)
class GameConfig:
    """Static game parameters: site count, horizon, and cost ranges."""

    n_sites: int
    horizon: int
    opening_max: float
    connection_max: float

    def __post_init__(self):
        if not isinstance(self.n_sites, int) or self.n_sites < 1:
            raise ConfigError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError(f"horizon must be a positive integer, got {self.horizon!r}")
        for name in ("opening_max", "connection_max"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ConfigError(f"{name} must be finite and >= 0, got {v!r}")
        if self.opening_max + self.connection_max <= 0:
            raise ConfigError("opening_max + connection_max must be positive")


@dataclass(frozen=True)
class CostPair:
    """One trial's cost vectors (opening c, connection d), same length."""

    opening: np.ndarray
    connection: np.ndarray

    def __post_init__(self):
        opening = np.asarray(self.opening, dtype=float)
        connection = np.asarray(self.connection, dtype=float)
        if opening.ndim != 1 or connection.ndim != 1:
            raise ConfigError("cost vectors must be 1-D")
        if opening.size != connection.size or opening.size == 0:
            raise ConfigError(
                f"cost vectors must share a positive length, got {opening.size} and {connection.size}"
            )
        if not (np.all(np.isfinite(opening)) and np.all(np.isfinite(connection))):
            raise ConfigError("cost vectors must be finite")
        if opening.min() < 0 or connection.min() < 0:
            raise ConfigError("cost vectors must be componentwise >= 0")
        object.__setattr__(self, "opening", opening)
        object.__setattr__(self, "connection", connection)

    @property
    def n_sites(self) -> int:
        return self.opening.size

    @classmethod
    def checked(cls, opening, connection, opening_max: float, connection_max: float) -> "CostPair":
        """Construct and reject (never clamp) any component above its bound."""
        pair = cls(opening, connection)
        hi_c = int(np.argmax(pair.opening))
        if pair.opening[hi_c] > opening_max:
            raise ConfigError(
                f"opening cost c_{hi_c + 1} = {pair.opening[hi_c]} exceeds bound {opening_max}"
            )
        hi_d = int(np.argmax(pair.connection))
        if pair.connection[hi_d] > connection_max:
            raise ConfigError(
                f"connection cost d_{hi_d + 1} = {pair.connection[hi_d]} exceeds bound {connection_max}"
            )
        return pair


@dataclass(frozen=True)
class SiteSet:
    """Nonempty set of 1-based site indices, stored sorted."""

    members: tuple[int, ...]

    def __post_init__(self):
        if len(self.members) == 0:
            raise InvalidActionError("site set must be nonempty")
        prev = 0
        for m in self.members:
            if not isinstance(m, int) or m <= prev:
                raise InvalidActionError(
                    f"members must be strictly increasing positive integers, got {self.members!r}"
                )
            prev = m

    @classmethod
    def of(cls, indices: Iterable[int], n_sites: int | None = None) -> "SiteSet":
        """Lenient constructor: deduplicates, sorts, and range-checks."""
        members = tuple(sorted({int(i) for i in indices}))
        if n_sites is not None and members and (members[0] < 1 or members[-1] > n_sites):
            raise InvalidActionError(f"site indices {members} outside 1..{n_sites}")
        return cls(members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, item) -> bool:
        return item in self.members

    def index_array(self) -> np.ndarray:
        """0-based index array for vectorized cost lookups."""
        return np.asarray(self.members, dtype=np.intp) - 1


def facility_loss(costs: CostPair, sites: SiteSet) -> float:
    """Opening costs of every chosen site plus the cheapest chosen connection."""
    if len(sites.members) == 0:
        raise InvalidActionError("site set must be nonempty")
    if sites.members[-1] > costs.n_sites:
        raise InvalidActionError(
            f"site {sites.members[-1]} outside instance with {costs.n_sites} sites"
        )
    idx = sites.index_array()
    return float(costs.opening[idx].sum() + costs.connection[idx].min())


def sort_by_connection_desc(connection) -> np.ndarray:
    """Stable permutation v (1-based) with d_v(1) >= d_v(2) >= ... >= d_v(N).

    Ties keep original order, so the permutation is deterministic.
    """
    d = np.asarray(connection, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ConfigError("connection vector must be 1-D and nonempty")
    return np.argsort(-d, kind="stable").astype(np.int64) + 1
