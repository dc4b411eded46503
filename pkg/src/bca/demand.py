"""Exact demand and budget-constrained demand queries by subset enumeration."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .valuations import MAX_ITEMS, TOL, ItemSet, SizeLimitError, UniverseError, Valuation, bit_matrix

MAX_VERIFY_ITEMS = 16


@dataclass
class QueryCounter:
    """Per-run tally of oracle calls."""

    dq_count: int = 0
    bcdq_count: int = 0
    value_count: int = 0


def as_prices(p: Sequence[float] | np.ndarray, m: int) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (m,):
        raise UniverseError(f"price vector has shape {arr.shape}, expected ({m},)")
    if np.any(~(arr >= 0)):
        raise ValueError("prices must be nonnegative")
    return arr


def bundle_price(p: Sequence[float] | np.ndarray, S: ItemSet) -> float:
    return float(sum(p[j] for j in S))


@lru_cache(maxsize=None)
def _local_order(k: int) -> np.ndarray:
    """Rank of each local mask under (cardinality, then lexicographic member list)."""
    keys = sorted(range(1 << k), key=lambda s: (bin(s).count("1"),
                                                [j for j in range(k) if s >> j & 1]))
    rank = np.empty(1 << k, dtype=np.int64)
    rank[keys] = np.arange(1 << k)
    rank.setflags(write=False)
    return rank


def _submasks(avail: ItemSet) -> tuple[np.ndarray, np.ndarray, list[int]]:
    members = list(avail.members)
    k = len(members)
    if k > MAX_ITEMS:
        raise SizeLimitError(f"demand queries enumerate at most {MAX_ITEMS} items")
    local = bit_matrix(k) if k else np.zeros((1, 0), dtype=np.int64)
    glob = local @ (np.int64(1) << np.asarray(members, dtype=np.int64)) if k else np.zeros(1, np.int64)
    return local, glob.astype(np.int64), members


def _choose(v: Valuation, avail: ItemSet, p: np.ndarray, budget: float | None) -> ItemSet:
    if avail.m != v.m:
        raise UniverseError(f"available set over {avail.m} items, valuation over {v.m}")
    local, glob, members = _submasks(avail)
    cost = local @ p[members] if members else np.zeros(1)
    util = v.table[glob] - cost
    if budget is not None:
        util = np.where(cost <= budget + TOL, util, -np.inf)
    best = util.max()
    rank = _local_order(len(members))
    pick = int(np.argmin(np.where(util >= best - TOL, rank, rank.size)))
    return ItemSet(int(glob[pick]), v.m)


def demand_query(v: Valuation, avail: ItemSet, p, counter: QueryCounter | None = None) -> ItemSet:
    """Utility-maximising bundle ``S ⊆ avail`` at prices ``p``.

    Ties within 1e-9 go to the smaller bundle, then to the
    lexicographically smallest member list.  The empty set is always a
    candidate, so the returned utility is nonnegative.
    """
    if counter is not None:
        counter.dq_count += 1
    return _choose(v, avail, as_prices(p, v.m), None)


def bc_demand_query(v: Valuation, avail: ItemSet, p, B: float,
                    counter: QueryCounter | None = None) -> ItemSet:
    """Utility-maximising bundle among those with ``p(S) <= B``; same tie-break."""
    if counter is not None:
        counter.bcdq_count += 1
    if not B >= 0:
        raise ValueError(f"budget must be nonnegative, got {B!r}")
    return _choose(v, avail, as_prices(p, v.m), float(B))


@dataclass(frozen=True)
class LemmaReport:
    passed: bool
    chosen: ItemSet
    checked: int
    witness: ItemSet | None = None
    which: str = ""
    slack: float = 0.0

    def __bool__(self) -> bool:
        return self.passed


def verify_bcdq_lemma(v: Valuation, B: float, avail: ItemSet, p, tol: float = TOL) -> LemmaReport:
    """Check both liquid-efficiency bounds of the BCDQ answer against every ``T ⊆ avail``.

    With ``S`` the BCDQ answer and ``w = min(v, B)``:
    (i) ``w(S) >= w(T) - p(T)`` and (ii) ``2 w(S) - p(S) >= w(T) - p(T)``.
    """
    if len(avail) > MAX_VERIFY_ITEMS:
        raise SizeLimitError(f"exhaustive verification enumerates at most {MAX_VERIFY_ITEMS} items")
    p = as_prices(p, v.m)
    S = bc_demand_query(v, avail, p, B)
    liq = np.minimum(v.table, B)
    _, glob, members = _submasks(avail)
    cost_T = bit_matrix(len(members)) @ p[members] if members else np.zeros(1)
    rhs = liq[glob] - cost_T
    lhs1 = liq[S.mask]
    lhs2 = 2 * liq[S.mask] - bundle_price(p, S)
    slack = float(min(lhs1, lhs2) - rhs.max())
    for which, lhs in (("i", lhs1), ("ii", lhs2)):
        bad = np.flatnonzero(lhs < rhs - tol)
        if bad.size:
            return LemmaReport(False, S, rhs.size, ItemSet(int(glob[bad[0]]), v.m), which, slack)
    return LemmaReport(True, S, rhs.size, slack=slack)
