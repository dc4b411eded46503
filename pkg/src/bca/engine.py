"""Sequential posted-price executor shared by all mechanisms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, NamedTuple, Sequence

import numpy as np

from .demand import QueryCounter, as_prices, bc_demand_query, bundle_price
from .valuations import ItemSet, Instance, UniverseError

UpdateRule = Callable[[np.ndarray, ItemSet], np.ndarray]


class CoinStream:
    """Seeded randomness for one mechanism run (PCG64, platform independent)."""

    def __init__(self, seed: int | Sequence[int]):
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def coin(self, q: float) -> bool:
        # always consume exactly one draw so replays stay aligned
        return bool(self.rng.random() < q)

    def permutation(self, n: int) -> list[int]:
        return [int(i) for i in self.rng.permutation(n)]


def no_update(prices: np.ndarray, S: ItemSet) -> np.ndarray:
    return prices


def doubling(prices: np.ndarray, S: ItemSet) -> np.ndarray:
    out = prices.copy()
    for j in S:
        out[j] *= 2
    return out


UPDATE_RULES: dict[str, UpdateRule] = {"none": no_update, "double": doubling}


@dataclass(frozen=True)
class Step:
    bidder: int
    prices: tuple[float, ...]
    demand: ItemSet
    coin: bool
    allocated: ItemSet


@dataclass(frozen=True)
class Outcome:
    allocation: tuple[ItemSet, ...]
    payments: tuple[float, ...]
    trace: tuple[Step, ...]
    mode: str = "standard"
    copies: tuple[int, ...] | None = None
    final_prices: tuple[float, ...] = ()
    queries: QueryCounter = field(default_factory=QueryCounter)
    meta: Mapping[str, Any] = field(default_factory=dict)


class Welfare(NamedTuple):
    sw: float
    lw: float
    revenue: float


def run_posted_price(inst: Instance, order: Sequence[int] | None, init, q: float,
                     update: UpdateRule, mode: str = "standard",
                     coins: CoinStream | None = None,
                     update_on: str = "demand") -> Outcome:
    """Serve bidders one by one with budget-constrained demand queries.

    Each bidder is allocated its provisional demand with probability
    ``q``.  Prices are updated after every bidder from the provisional
    demand (``update_on="demand"``) or only from what was actually
    allocated (``update_on="allocation"``).  In overselling mode items are
    never removed and ``q`` must be 1.
    """
    if not 0 < q <= 1:
        raise ValueError(f"allocation probability must lie in (0, 1], got {q}")
    if mode not in ("standard", "overselling"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "overselling" and q != 1:
        raise ValueError("overselling runs require q = 1")
    if update_on not in ("demand", "allocation"):
        raise ValueError(f"unknown update_on {update_on!r}")
    m, n = inst.m, inst.n
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of range({n})")
    coins = coins if coins is not None else CoinStream(0)
    prices = as_prices(init, m).copy()
    avail = ItemSet.full(m)
    counter = QueryCounter()
    alloc = [ItemSet.empty(m)] * n
    pay = [0.0] * n
    copies = [0] * m
    trace = []
    for i in order:
        b = inst.bidders[i]
        S = bc_demand_query(b.valuation, avail, prices, b.budget, counter)
        hit = coins.coin(q)
        R = S if hit else ItemSet.empty(m)
        alloc[i] = R
        pay[i] = bundle_price(prices, R)
        trace.append(Step(i, tuple(prices), S, hit, R))
        if mode == "standard":
            avail = avail - R
        else:
            for j in R:
                copies[j] += 1
        new = update(prices, S if update_on == "demand" else R)
        if np.any(new < prices):
            raise ValueError("price update rules must be nondecreasing")
        prices = new
    return Outcome(tuple(alloc), tuple(pay), tuple(trace), mode,
                   tuple(copies) if mode == "overselling" else None,
                   tuple(float(x) for x in prices), counter)


def fixed_price_auction(inst: Instance, prices, order: Sequence[int] | None = None) -> Outcome:
    """Posted prices that never move, every demand allocated."""
    return run_posted_price(inst, order, prices, 1.0, no_update)


def outcome_welfare(inst: Instance, o: Outcome) -> Welfare:
    if len(o.allocation) != inst.n:
        raise UniverseError(f"outcome has {len(o.allocation)} bundles for {inst.n} bidders")
    sw = lw = 0.0
    for b, R in zip(inst.bidders, o.allocation):
        if R.m != inst.m:
            raise UniverseError("outcome bundles are on a different universe")
        x = b.valuation.value(R)
        sw += x
        lw += min(x, b.budget)
    return Welfare(sw, lw, float(sum(o.payments)))
