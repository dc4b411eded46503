"""Random valuation families and named instance generators.

All random values are integer multiples of 1/64 so that sums of a few
dozen of them are exact in double precision.
"""
from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from .valuations import XOS, Additive, Bidder, Coverage, Instance, ItemSet, Valuation

GRID = 64
FAMILIES = ("additive", "xos", "coverage", "clone-market", "footnote-demo")


def grid_uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    return rng.integers(round(lo * GRID), round(hi * GRID), size=size, endpoint=True) / GRID


def random_additive(rng, m: int, lo: float = 0.0, hi: float = 8.0) -> Additive:
    return Additive(tuple(grid_uniform(rng, lo, hi, m)))


def random_xos(rng, m: int, clauses: int = 3, lo: float = 0.0, hi: float = 8.0) -> XOS:
    return XOS(tuple(tuple(row) for row in grid_uniform(rng, lo, hi, (clauses, m))))


def random_coverage(rng, m: int, elements: int = 6, p: float = 0.4,
                    lo: float = 0.0, hi: float = 8.0) -> Coverage:
    hits = rng.random((m, elements)) < p
    covers = tuple(frozenset(int(e) for e in np.flatnonzero(row)) for row in hits)
    return Coverage(covers, tuple(grid_uniform(rng, lo, hi, elements)))


VALUATION_SAMPLERS = {
    "additive": random_additive,
    "xos": random_xos,
    "coverage": random_coverage,
}


def random_budget(rng, v: Valuation, lo: float, hi: float) -> float:
    """Budget drawn as a grid-rounded fraction in [lo, hi] of the grand-bundle value."""
    frac = float(rng.uniform(lo, hi))
    return round(frac * v.value(ItemSet.full(v.m)) * GRID) / GRID


def footnote_demo() -> Instance:
    """Two items a=0, b=1 with v(a) = v(ab) = 10, v(b) = 2 and budget 2."""
    return Instance(2, (Bidder(XOS(((10.0, 0.0), (0.0, 2.0))), 2.0),))


def gen_instance(family: str, params: Mapping[str, Any] | None = None, seed: int = 0) -> Instance:
    """Deterministic instance per ``(family, params, seed)``.

    Common params: ``n``, ``m``, ``lo``, ``hi`` (weight range),
    ``budget_lo``, ``budget_hi`` (budget as a fraction of v(U)).
    ``clone-market`` additionally takes ``archetypes``, ``copies`` and
    ``base`` (the family of each archetype).
    """
    params = dict(params or {})
    if family == "footnote-demo":
        return footnote_demo()
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    rng = np.random.default_rng(seed)
    m = int(params.pop("m", 4))
    lo, hi = float(params.pop("lo", 0.0)), float(params.pop("hi", 8.0))
    b_lo, b_hi = float(params.pop("budget_lo", 0.25)), float(params.pop("budget_hi", 1.25))
    if family == "clone-market":
        archetypes = int(params.pop("archetypes", 2))
        copies = int(params.pop("copies", 3))
        base = params.pop("base", "additive")
        n = archetypes
    else:
        base, n = family, int(params.pop("n", 3))
    if n < 1:
        raise ValueError("n must be positive")
    sampler = VALUATION_SAMPLERS.get(base)
    if sampler is None:
        raise ValueError(f"unknown base family {base!r}")
    extra = {k: params.pop(k) for k in list(params) if k in ("clauses", "elements", "p")}
    if params:
        raise ValueError(f"unexpected parameters for {family}: {sorted(params)}")
    bidders = []
    for _ in range(n):
        v = sampler(rng, m, lo=lo, hi=hi, **extra)
        bidders.append(Bidder(v, random_budget(rng, v, b_lo, b_hi)))
    if family == "clone-market":
        bidders = [b for b in bidders for _ in range(copies)]
    return Instance(m, tuple(bidders))
