import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bca import (XOS, Additive, Bidder, CmConfig, CoinStream, Coverage, Instance, ItemSet, cm_bound,
                 gen_instance, greedy_alloc, measure_competitiveness, opt_value, outcome_welfare,
                 run_cm, split_bidders)

from conftest import instances


def clones(n, w=(4, 4), B=100):
    return Instance(len(w), tuple(Bidder(Additive(w), B) for _ in range(n)))


def test_greedy_two_bidders():
    inst = Instance(2, (Bidder(Additive((5, 1)), 100), Bidder(Additive((1, 5)), 100)))
    g = greedy_alloc(inst)
    assert [S.members for S in g.allocation] == [(0,), (1,)]
    assert g.contribution == (5, 5)


def test_greedy_single_bidder():
    inst = Instance(3, (Bidder(Additive((1, 2, 3)), 4),))
    g = greedy_alloc(inst)
    assert g.lw == 4
    assert g.contribution == (1, 2, 1)


def test_greedy_all_zero():
    g = greedy_alloc(clones(2, (0, 0)))
    assert all(len(S) == 0 for S in g.allocation) and g.contribution == (0, 0)


def test_greedy_exact_uses_liquid_clauses():
    inst = Instance(2, (Bidder(Additive((6, 4)), 5),))
    g = greedy_alloc(inst, "exact")
    assert g.contribution == (5, 0) and g.method == "exact"


def split_seed(n, want_S):
    return next(s for s in range(1000) if split_bidders(n, CoinStream(s))[0] == want_S)


def test_run_cm_clones():
    inst = clones(2)
    seed = split_seed(2, (0,))
    o = run_cm(inst, CmConfig(2.0), CoinStream(seed))
    assert o.meta["contributions"] == (4, 4)
    assert o.meta["prices"] == (1, 1)
    assert [S.members for S in o.allocation] == [(), (0, 1)]
    assert outcome_welfare(inst, o).lw == 8


def test_run_cm_large_beta_is_free_demand():
    inst = Instance(2, (Bidder(Additive((3, 0)), 100), Bidder(Additive((1, 2)), 100)))
    seed = split_seed(2, (0,))
    o = run_cm(inst, CmConfig(1e12), CoinStream(seed))
    assert max(o.meta["prices"]) < 1e-9
    assert o.allocation[1].members == (0, 1)


def test_run_cm_zero_budgets():
    inst = clones(3, B=0)
    o = run_cm(inst, CmConfig(), CoinStream(0))
    assert outcome_welfare(inst, o).lw == 0
    assert o.meta["prices"] == (0, 0)


def test_run_cm_needs_two():
    with pytest.raises(ValueError):
        run_cm(clones(1), CmConfig(), CoinStream(0))


def test_config_validation():
    with pytest.raises(ValueError):
        CmConfig(1.0)
    with pytest.raises(ValueError):
        CmConfig(2.0, "fancy")


def test_xos_side_falls_back_to_exact():
    v = XOS(((1, 0, 0), (0, 1, 1)))
    inst = Instance(3, (Bidder(v, 100),) * 2)
    o = run_cm(inst, CmConfig(), CoinStream(0))
    assert o.meta["alg"] == "exact"


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
def test_split_partition(n):
    for s in range(30):
        S, T = split_bidders(n, CoinStream(s))
        assert sorted(S + T) == list(range(n))
        assert len(S) == math.ceil(n / 2) and len(T) == n // 2


def test_split_is_uniform():
    counts = {}
    for s in range(3000):
        S, _ = split_bidders(4, CoinStream(s))
        counts[S] = counts.get(S, 0) + 1
    assert len(counts) == 6
    # each of the six halves expected 500 times; 5 sigma is about 100
    assert all(abs(c - 500) < 100 for c in counts.values())


@settings(max_examples=100, deadline=None)
@given(instances(max_items=4, max_bidders=4, kinds=("additive", "coverage")), st.integers(0, 2**31),
       st.sampled_from([1.5, 2.0, 5.0]))
def test_price_provenance_and_side_outcomes(inst, seed, beta):
    if inst.n < 2:
        return
    o = run_cm(inst, CmConfig(beta), CoinStream(seed))
    assert o.meta["prices"] == tuple(c / (2 * beta) for c in o.meta["contributions"])
    for i in o.meta["S"]:
        assert len(o.allocation[i]) == 0 and o.payments[i] == 0
    assert {st_.bidder for st_ in o.trace} == set(o.meta["T"])


@settings(max_examples=150, deadline=None)
@given(instances(max_items=5, max_bidders=4, kinds=("additive", "coverage")))
def test_greedy_half_approximation(inst):
    g = greedy_alloc(inst)
    assert 2 * g.lw >= opt_value(inst) - 1e-9
    # contributions sum to the liquid welfare of the greedy allocation
    lw = sum(min(b.valuation.value(S), b.budget) for b, S in zip(inst.bidders, g.allocation))
    assert g.lw == pytest.approx(lw, abs=1e-9)
    for j in range(inst.m):
        if not any(j in S for S in g.allocation):
            assert g.contribution[j] == 0


def test_cm_bound_examples():
    assert cm_bound(0, 0, 2) == pytest.approx(1 / 16)
    assert cm_bound(0.3, 0.5, 2) == 0
    beta = 3.0
    assert cm_bound(2 * (beta - 1) / (3 * beta - 1), 0.1, beta) == pytest.approx(0, abs=1e-15)
    assert cm_bound(1.9, 0, 2) == 0


@pytest.mark.parametrize("args", [(2, 0, 2), (-0.1, 0, 2), (0, 0.6, 2), (0, 0, 1)])
def test_cm_bound_domain(args):
    with pytest.raises(ValueError):
        cm_bound(*args)


def test_competitiveness_clone_singletons():
    # unit-demand clones valuing either item: any two of them recover OPT
    inst = Instance(2, tuple(Bidder(XOS(((3, 0), (0, 3))), 100) for _ in range(4)))
    c = measure_competitiveness(inst, 0.5, 300, 0)
    assert c.delta_hat == 0 and c.opt == 6
    assert c.interval[0] == 0 and c.both_retain == 1


def test_competitiveness_dominant_bidder():
    inst = Instance(1, (Bidder(Additive((10,)), 100), Bidder(Additive((1,)), 100)))
    c = measure_competitiveness(inst, 0.1, 2000, 1)
    # the dominant bidder lands on the price-setting side half the time
    assert abs(c.delta_hat - 0.5) <= 5 * math.sqrt(0.25 / c.trials)
    assert c.interval[0] < c.delta_hat < c.interval[1]
    assert c.both_retain == 0


def test_competitiveness_eps_near_two():
    inst = gen_instance("additive", {"n": 3, "m": 3}, 4)
    assert measure_competitiveness(inst, 2 - 1e-12, 200, 0).delta_hat == 0


def test_competitiveness_matches_exact_split_probability():
    inst = gen_instance("additive", {"n": 4, "m": 3}, 9)
    eps = 0.6
    opt = opt_value(inst)
    halves = list(itertools.combinations(range(4), 2))
    bad = 0
    for S in halves:
        T = tuple(i for i in range(4) if i not in S)
        bad += opt_value(inst.restricted(T)) < (1 - eps / 2) * opt - 1e-9
    exact = bad / len(halves)
    c = measure_competitiveness(inst, eps, 3000, 2)
    assert abs(c.delta_hat - exact) <= 5 * math.sqrt(exact * (1 - exact) / c.trials) + 1e-12
