"""Shared brute-force oracles.

These deliberately avoid the library's tables, bitmask DP and tie-break
ranking: they enumerate with itertools and evaluate through
``Valuation.value`` on explicit member lists.
"""
import itertools
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from bca import XOS, Additive, Bidder, Coverage, Instance, ItemSet

TOL = 1e-9


def bundles_in_tiebreak_order(members):
    """Subsets by cardinality, then lexicographically (what combinations yields)."""
    for k in range(len(members) + 1):
        yield from itertools.combinations(sorted(members), k)


def naive_demand(v, avail, prices, budget=None):
    best, best_u = None, -math.inf
    cands = []
    for combo in bundles_in_tiebreak_order(avail):
        cost = sum(prices[j] for j in combo)
        if budget is not None and cost > budget + TOL:
            continue
        u = v.value(ItemSet.of(combo, v.m)) - cost
        cands.append((combo, u))
        best_u = max(best_u, u)
    for combo, u in cands:
        if u >= best_u - TOL:
            return set(combo)


def assignment_value(inst, assign, objective="lw"):
    total = 0.0
    for i, b in enumerate(inst.bidders):
        x = b.valuation.value(ItemSet.of([j for j, a in enumerate(assign) if a == i], inst.m))
        total += min(x, b.budget) if objective == "lw" else x
    return total


def naive_opt(inst, objective="lw"):
    """(value, assignment) over all (n+1)^m maps, unassigned (-1) ordered first."""
    maps = list(itertools.product(range(-1, inst.n), repeat=inst.m))
    vals = [assignment_value(inst, a, objective) for a in maps]
    best = max(vals)
    for a, x in zip(maps, vals):
        if x >= best - TOL:
            return best, a


def grid(lo=0, hi=8):
    return st.integers(lo * 64, hi * 64).map(lambda k: k / 64)


@st.composite
def valuations(draw, m=None, max_items=6, kinds=("additive", "xos", "coverage")):
    m = m or draw(st.integers(1, max_items))
    kind = draw(st.sampled_from(kinds))
    if kind == "additive":
        return Additive(tuple(draw(st.lists(grid(), min_size=m, max_size=m))))
    if kind == "xos":
        k = draw(st.integers(1, 3))
        return XOS(tuple(tuple(draw(st.lists(grid(), min_size=m, max_size=m))) for _ in range(k)))
    e = draw(st.integers(1, 5))
    covers = tuple(frozenset(draw(st.sets(st.integers(0, e - 1)))) for _ in range(m))
    return Coverage(covers, tuple(draw(st.lists(grid(), min_size=e, max_size=e))))


@st.composite
def instances(draw, max_items=4, max_bidders=3, kinds=("additive", "xos", "coverage")):
    m = draw(st.integers(1, max_items))
    n = draw(st.integers(1, max_bidders))
    bidders = []
    for _ in range(n):
        v = draw(valuations(m=m, kinds=kinds))
        bidders.append(Bidder(v, draw(grid(0, 16))))
    return Instance(m, tuple(bidders))


@pytest.fixture
def footnote():
    from bca import footnote_demo
    return footnote_demo()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
