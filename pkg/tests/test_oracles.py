import itertools
import math

import numpy as np
import pytest

from olfl import (
    CapExceededError,
    ConfigError,
    CostPair,
    ExactHedge,
    GameConfig,
    ProtocolError,
    SiteSet,
    best_fixed_subset,
    cheapest_singleton_play,
    exact_expected_loss,
    facility_loss,
    ftl_greedy_play,
)
from olfl.verify import run_deterministic_against_killer


def test_hedge_init():
    hedge = ExactHedge(GameConfig(2, 50, 1.0, 1.0))
    assert hedge.n_subsets == 3
    assert np.allclose(hedge.weights, 1.0 / 3.0)
    assert hedge.loss_scale == 3.0  # N*C + D
    assert hedge.learning_rate == pytest.approx(math.sqrt(8 * math.log(3) / 50), rel=1e-15)


def test_hedge_refuses_large_instances():
    with pytest.raises(CapExceededError):
        ExactHedge(GameConfig(17, 10, 1.0, 1.0))


def test_hedge_subset_losses_in_bitmask_order():
    hedge = ExactHedge(GameConfig(2, 10, 1.0, 1.0))
    losses = hedge.subset_losses(CostPair([0.5, 0.2], [0.3, 0.9]))
    # masks 1,2,3 are {1}, {2}, {1,2}
    assert np.allclose(losses, [0.8, 1.1, 1.0])


def test_hedge_play_single_site():
    hedge = ExactHedge(GameConfig(1, 10, 1.0, 1.0))
    assert hedge.play(np.random.default_rng(0)).members == (1,)


def test_hedge_fresh_distribution_uniform():
    hedge = ExactHedge(GameConfig(2, 10, 1.0, 1.0))
    rng = np.random.default_rng(1)
    counts = {(1,): 0, (2,): 0, (1, 2): 0}
    costs = CostPair([0.0, 0.0], [0.0, 0.0])  # zero losses keep weights flat
    for _ in range(30_000):
        counts[hedge.play(rng).members] += 1
        hedge.update(costs)
    for c in counts.values():
        assert abs(c / 30_000 - 1 / 3) <= 0.01


def test_hedge_update_monotone_toward_the_winner():
    hedge = ExactHedge(GameConfig(2, 10, 1.0, 1.0))
    hedge.play(np.random.default_rng(2))
    # {1} alone has zero loss
    hedge.update(CostPair([0.0, 0.5], [0.0, 0.5]))
    assert hedge.weights[0] > hedge.weights[2] > hedge.weights[1]


def test_hedge_exact_exponents():
    hedge = ExactHedge(GameConfig(2, 10, 1.0, 1.0))
    hedge.learning_rate = hedge.loss_scale  # makes the exponent exactly -loss
    hedge.play(np.random.default_rng(3))
    hedge.update(CostPair([1.0, 0.0], [0.0, 0.0]))  # losses (1, 0, 1)
    expected = np.array([math.exp(-1.0), 1.0, math.exp(-1.0)])
    expected /= expected.sum()
    assert np.abs(hedge.weights - expected).max() <= 1e-15


def test_hedge_concentrates():
    hedge = ExactHedge(GameConfig(2, 400, 1.0, 1.0))
    rng = np.random.default_rng(4)
    costs = CostPair([1.0, 0.0], [1.0, 0.0])  # {2} is free
    for _ in range(400):
        hedge.play(rng)
        hedge.update(costs)
    hits = 0
    for _ in range(10_000):
        hits += hedge.play(rng).members == (2,)
        hedge.update(costs)
    assert hits / 10_000 >= 0.99


def test_hedge_update_returns_pre_update_expectation():
    hedge = ExactHedge(GameConfig(2, 10, 1.0, 1.0))
    costs = CostPair([0.5, 0.2], [0.3, 0.9])
    before = hedge.expected_loss(costs)
    hedge.play(np.random.default_rng(5))
    assert hedge.update(costs) == pytest.approx(before, rel=1e-15)


def test_hedge_alternation():
    hedge = ExactHedge(GameConfig(2, 10, 1.0, 1.0))
    with pytest.raises(ProtocolError):
        hedge.update(CostPair([0.1, 0.1], [0.1, 0.1]))
    hedge.play(np.random.default_rng(6))
    with pytest.raises(ProtocolError):
        hedge.play(np.random.default_rng(6))


def test_ftl_greedy_conventions():
    assert ftl_greedy_play([]).members == (1,)
    history = [CostPair([0.0, 0.0], [0.9, 0.1])]
    assert ftl_greedy_play(history).members == (2,)


def _slow_greedy(history, tol=1e-9):
    # independent per-subset resummation; ties and the strict-decrease stop
    # are judged with a tolerance so summation order cannot flip them
    n = history[0].n_sites

    def cum(members):
        s = SiteSet(tuple(sorted(members)))
        return math.fsum(facility_loss(cp, s) for cp in history)

    scores = [cum((i,)) for i in range(1, n + 1)]
    floor = min(scores)
    best = next(i for i in range(1, n + 1) if scores[i - 1] <= floor + tol)
    members = [best]
    obj = cum(tuple(members))
    while len(members) < n:
        scored = [(cum(tuple(members) + (i,)), i) for i in range(1, n + 1) if i not in members]
        floor = min(cost for cost, _ in scored)
        cost, site = next(pair for pair in scored if pair[0] <= floor + tol)
        if not cost < obj - tol:
            break
        members.append(site)
        obj = cost
    return tuple(sorted(members))


def test_ftl_greedy_matches_slow_reimplementation_on_killer_history():
    _, history, actions = run_deterministic_against_killer(ftl_greedy_play, 8, 60)
    for t, action in enumerate(actions):
        expected = (1,) if t == 0 else _slow_greedy(history[:t])
        assert action.members == expected


def test_cheapest_singleton():
    assert cheapest_singleton_play([]).members == (1,)
    history = [
        CostPair([0.5, 0.1, 0.3], [0.2, 0.6, 0.1]),
        CostPair([0.4, 0.1, 0.5], [0.3, 0.2, 0.2]),
    ]
    totals = [0.5 + 0.2 + 0.4 + 0.3, 0.1 + 0.6 + 0.1 + 0.2, 0.3 + 0.1 + 0.5 + 0.2]
    assert totals[1] == min(totals)
    assert cheapest_singleton_play(history).members == (2,)


def test_best_fixed_tie_rules():
    # zero opening costs, tied connections: smallest index singleton wins
    history = [CostPair([0.0, 0.0], [0.4, 0.4])]
    subset, loss = best_fixed_subset(history)
    assert subset.members == (1,) and loss == pytest.approx(0.4)

    # equal cost at different cardinalities: smaller set wins
    history = [CostPair([0.25, 0.25], [0.5, 0.25])]
    # {1}: 0.75, {2}: 0.5, {1,2}: 0.75 -> {2}
    subset, loss = best_fixed_subset(history)
    assert subset.members == (2,) and loss == pytest.approx(0.5)


def test_best_fixed_worked_example():
    history = [CostPair([0.5, 0.01], [0.0, 1.0]) for _ in range(10)]
    subset, loss = best_fixed_subset(history)
    assert subset.members == (1,)
    assert loss == pytest.approx(5.0)


def test_best_fixed_matches_independent_scan():
    rng = np.random.default_rng(7)
    for _ in range(20):
        history = [CostPair(rng.uniform(0, 1, 4), rng.uniform(0, 1, 4)) for _ in range(20)]
        subset, loss = best_fixed_subset(history)
        best = None
        for r in range(1, 5):
            for combo in itertools.combinations(range(1, 5), r):
                c = sum(facility_loss(cp, SiteSet(combo)) for cp in history)
                key = (c, len(combo), combo)
                if best is None or key < best:
                    best = key
        assert loss == pytest.approx(best[0], rel=1e-12)
        assert subset.members == best[2]


def test_best_fixed_cardinality_restrictions():
    rng = np.random.default_rng(8)
    history = [CostPair(rng.uniform(0, 1, 5), rng.uniform(0, 1, 5)) for _ in range(15)]
    s_max, l_max = best_fixed_subset(history, max_card=2)
    assert len(s_max) <= 2
    s_exact, l_exact = best_fixed_subset(history, exact_card=2)
    assert len(s_exact) == 2
    assert l_max <= l_exact + 1e-12
    with pytest.raises(ConfigError):
        best_fixed_subset(history, max_card=1, exact_card=1)
    with pytest.raises(ConfigError):
        best_fixed_subset(history, max_card=0)
    with pytest.raises(ConfigError):
        best_fixed_subset(history, exact_card=6)


def test_best_fixed_site_cap():
    history = [CostPair(np.full(17, 0.5), np.full(17, 0.5))]
    with pytest.raises(CapExceededError):
        best_fixed_subset(history)
    subset, _ = best_fixed_subset(history, max_card=1)  # restricted scan is fine
    assert len(subset) == 1


def test_best_fixed_never_beaten_by_random_subsets():
    rng = np.random.default_rng(9)
    history = [CostPair(rng.uniform(0, 1, 6), rng.uniform(0, 1, 6)) for _ in range(30)]
    _, best_loss = best_fixed_subset(history)
    for _ in range(1000):
        size = int(rng.integers(1, 7))
        members = tuple(sorted(rng.choice(6, size=size, replace=False) + 1))
        x = SiteSet(tuple(int(i) for i in members))
        assert sum(facility_loss(cp, x) for cp in history) >= best_loss - 1e-12


def test_exact_expected_loss_single_draw_closed_form():
    rng = np.random.default_rng(10)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        p = rng.dirichlet(np.ones(n))
        costs = CostPair(rng.uniform(0, 1, n), rng.uniform(0, 1, n))
        expected = exact_expected_loss(p, 1, costs)
        assert expected == pytest.approx(float(p @ (costs.opening + costs.connection)), abs=1e-12)


def test_exact_expected_loss_worked_example():
    value = exact_expected_loss([0.5, 0.5], 1, CostPair([0.1, 0.2], [0.9, 0.3]))
    assert value == pytest.approx(0.75, abs=1e-15)


def test_exact_expected_loss_point_mass():
    costs = CostPair([0.3, 0.6, 0.1], [0.2, 0.9, 0.4])
    for ups in (1, 2, 3):
        assert exact_expected_loss([0.0, 1.0, 0.0], ups, costs) == pytest.approx(1.5, abs=1e-15)


def test_exact_expected_loss_guards():
    costs = CostPair(np.full(10, 0.5), np.full(10, 0.5))
    with pytest.raises(CapExceededError):
        exact_expected_loss(np.full(10, 0.1), 7, costs)  # 10^7 sequences
    with pytest.raises(ConfigError):
        exact_expected_loss([1.0], 0, CostPair([0.1], [0.1]))
    with pytest.raises(ConfigError):
        exact_expected_loss([0.5, 0.5], 2, CostPair([0.1], [0.1]))
