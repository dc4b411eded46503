import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bca import (XOS, Additive, ItemSet, QueryCounter, bc_demand_query, demand_query, liquid,
                 verify_bcdq_lemma)

from conftest import grid, naive_demand, valuations


def members(S):
    return set(S.members)


def test_footnote_bcdq_takes_a(footnote):
    b = footnote.bidders[0]
    S = bc_demand_query(b.valuation, ItemSet.full(2), (2, 1), b.budget)
    assert members(S) == {0}


def test_footnote_liquid_dq_takes_b(footnote):
    S = demand_query(liquid(footnote.bidders[0]), ItemSet.full(2), (2, 1))
    assert members(S) == {1}


def test_empty_avail():
    v = Additive((5, 1))
    assert members(demand_query(v, ItemSet.empty(2), (1, 2))) == set()
    assert members(bc_demand_query(v, ItemSet.empty(2), (1, 2), 10)) == set()


def test_additive_demand():
    assert members(demand_query(Additive((5, 1)), ItemSet.full(2), (1, 2))) == {0}


def test_zero_budget_positive_prices():
    assert members(bc_demand_query(Additive((5, 1)), ItemSet.full(2), (1, 2), 0)) == set()


def test_tie_prefers_smaller_then_lexicographic():
    v = XOS(((2, 0, 0), (0, 2, 0)))
    # {0} and {1} both give utility 1; {2} ties the empty set at 0
    assert members(demand_query(v, ItemSet.full(3), (1, 1, 0))) == {0}
    assert members(demand_query(Additive((1,)), ItemSet.full(1), (1,))) == set()


def test_footnote_lemma(footnote):
    b = footnote.bidders[0]
    rep = verify_bcdq_lemma(b.valuation, b.budget, ItemSet.full(2), (2, 1))
    assert rep.passed
    assert rep.checked == 4


def test_lemma_vacuous_on_empty_avail():
    assert verify_bcdq_lemma(Additive((1, 1)), 1, ItemSet.empty(2), (1, 1))


def test_counter_counts_each_call():
    c = QueryCounter()
    v = Additive((1, 2))
    demand_query(v, ItemSet.full(2), (0, 0), c)
    bc_demand_query(v, ItemSet.full(2), (0, 0), 1, c)
    bc_demand_query(v, ItemSet.full(2), (0, 0), 1, c)
    assert (c.dq_count, c.bcdq_count) == (1, 2)


def test_price_length_checked():
    with pytest.raises(ValueError):
        demand_query(Additive((1, 2)), ItemSet.full(2), (1,))


@st.composite
def query(draw):
    v = draw(valuations(max_items=6))
    p = draw(st.lists(grid(0, 4), min_size=v.m, max_size=v.m))
    avail = ItemSet(draw(st.integers(0, (1 << v.m) - 1)), v.m)
    B = draw(st.one_of(grid(0, 20), st.just(math.inf)))
    return v, p, avail, B


@settings(max_examples=300, deadline=None)
@given(query())
def test_dq_matches_enumeration(q):
    v, p, avail, _ = q
    assert members(demand_query(v, avail, p)) == naive_demand(v, avail.members, p)


@settings(max_examples=300, deadline=None)
@given(query())
def test_bcdq_matches_enumeration(q):
    v, p, avail, B = q
    S = bc_demand_query(v, avail, p, B)
    assert members(S) == naive_demand(v, avail.members, p, B)
    assert S.issubset(avail)
    cost = sum(p[j] for j in S)
    assert cost <= B + 1e-9
    assert v.value(S) - cost >= -1e-9
    # affordability under the liquid valuation
    assert min(v.value(S), B) >= cost - 1e-9


@settings(max_examples=200, deadline=None)
@given(query())
def test_bcdq_inactive_budget_is_dq(q):
    v, p, avail, _ = q
    total = sum(p[j] for j in avail)
    assert bc_demand_query(v, avail, p, total) == demand_query(v, avail, p)
    assert bc_demand_query(v, avail, p, math.inf) == demand_query(v, avail, p)


@settings(max_examples=200, deadline=None)
@given(query())
def test_queries_are_deterministic(q):
    v, p, avail, B = q
    assert bc_demand_query(v, avail, p, B) == bc_demand_query(v, avail, np.array(p), B)


@settings(max_examples=300, deadline=None)
@given(query())
def test_bcdq_lemma_property(q):
    v, p, avail, B = q
    assert verify_bcdq_lemma(v, B, avail, p).passed
