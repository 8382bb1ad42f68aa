import numpy as np
import pytest

from olfl import (
    ConfigError,
    CostPair,
    GameConfig,
    InvalidActionError,
    SiteSet,
    facility_loss,
    sort_by_connection_desc,
)


def test_game_config_rejects_bad_fields():
    with pytest.raises(ConfigError):
        GameConfig(0, 10, 1.0, 1.0)
    with pytest.raises(ConfigError):
        GameConfig(4, 0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        GameConfig(4, 10, -0.5, 1.0)
    with pytest.raises(ConfigError):
        GameConfig(4, 10, 1.0, float("inf"))
    # both bounds zero would make every loss zero
    with pytest.raises(ConfigError):
        GameConfig(4, 10, 0.0, 0.0)
    GameConfig(4, 10, 0.0, 1.0)  # one zero bound is fine


def test_cost_pair_validation():
    cp = CostPair([0.5, 0.2], [0.3, 0.9])
    assert cp.n_sites == 2
    assert cp.opening.dtype == float
    with pytest.raises(ConfigError):
        CostPair([0.5], [0.3, 0.9])
    with pytest.raises(ConfigError):
        CostPair([], [])
    with pytest.raises(ConfigError):
        CostPair([0.5, -0.1], [0.3, 0.9])
    with pytest.raises(ConfigError):
        CostPair([0.5, float("nan")], [0.3, 0.9])


def test_cost_pair_checked_names_the_field():
    CostPair.checked([0.5, 1.0], [0.3, 0.9], 1.0, 1.0)
    with pytest.raises(ConfigError, match=r"c_3 = 1\.5"):
        CostPair.checked([0.5, 0.2, 1.5], [0.3, 0.9, 0.1], 1.0, 1.0)
    with pytest.raises(ConfigError, match=r"d_1"):
        CostPair.checked([0.5, 0.2], [2.5, 0.9], 1.0, 1.0)


def test_site_set_basics():
    s = SiteSet.of([3, 1, 3, 2], 5)
    assert s.members == (1, 2, 3)
    assert len(s) == 3
    assert 2 in s and 4 not in s
    assert list(s) == [1, 2, 3]
    assert s.index_array().tolist() == [0, 1, 2]
    with pytest.raises(InvalidActionError):
        SiteSet(())
    with pytest.raises(InvalidActionError):
        SiteSet((2, 1))  # must be sorted strictly increasing
    with pytest.raises(InvalidActionError):
        SiteSet.of([0, 1], 5)
    with pytest.raises(InvalidActionError):
        SiteSet.of([6], 5)


def test_facility_loss_examples():
    cp = CostPair([0.5, 0.2], [0.3, 0.9])
    assert facility_loss(cp, SiteSet((1, 2))) == pytest.approx(1.0, abs=1e-15)
    assert facility_loss(cp, SiteSet((2,))) == pytest.approx(1.1, abs=1e-15)
    zero_open = CostPair(np.zeros(4), [0.4, 0.1, 0.9, 0.3])
    assert facility_loss(zero_open, SiteSet((1, 2, 3, 4))) == pytest.approx(0.1)


def test_facility_loss_rejects_out_of_range():
    cp = CostPair([0.5, 0.2], [0.3, 0.9])
    with pytest.raises(InvalidActionError):
        facility_loss(cp, SiteSet((3,)))


def test_facility_loss_bounds_and_monotonicity():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 8))
        c = rng.uniform(0.0, 1.0, n)
        d = rng.uniform(0.0, 1.0, n)
        members = tuple(sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False) + 1))
        x = SiteSet(tuple(int(i) for i in members))
        loss = facility_loss(CostPair(c, d), x)
        assert loss <= len(x) * 1.0 + 1.0 + 1e-12
        # lowering any single connection cost never raises the loss
        j = int(rng.integers(n))
        d2 = d.copy()
        d2[j] *= rng.uniform(0.0, 1.0)
        assert facility_loss(CostPair(c, d2), x) <= loss + 1e-12


def test_sort_examples():
    assert sort_by_connection_desc([0.3, 0.9]).tolist() == [2, 1]
    assert sort_by_connection_desc([0.5, 0.5, 0.5]).tolist() == [1, 2, 3]
    assert sort_by_connection_desc([0.1, 0.4, 0.2, 0.9]).tolist() == [4, 2, 3, 1]


def test_sort_is_a_descending_permutation():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(1, 30))
        # duplicate-heavy vectors exercise the tie rule
        d = rng.choice(rng.uniform(0.0, 1.0, max(1, n // 2)), size=n)
        v = sort_by_connection_desc(d)
        assert sorted(v.tolist()) == list(range(1, n + 1))
        sorted_d = d[v - 1]
        assert np.all(np.diff(sorted_d) <= 0)
        assert np.array_equal(v, sort_by_connection_desc(d))
