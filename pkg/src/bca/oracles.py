"""Brute-force ground truth: welfare optima, supporting prices, audits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .demand import as_prices, bundle_price
from .engine import CoinStream, Outcome, fixed_price_auction, outcome_welfare
from .valuations import (TOL, XOS, Bidder, Capped, Instance, ItemSet, SizeLimitError,
                         UniverseError, bit_matrix, liquid_xos_clause, xos_clause)

MAX_ASSIGNMENTS = 10**7
MAX_PROFIT_CHECK = 12


@lru_cache(maxsize=16)
def _pairs(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (mask, sub) with sub ⊆ mask over k bits, grouped by mask.

    Returns ``(mask, sub, starts)`` where ``starts[s]`` is the offset of
    mask ``s``'s group, suitable for ``np.maximum.reduceat``.
    """
    mask = np.zeros(1, dtype=np.int64)
    sub = np.zeros(1, dtype=np.int64)
    for j in range(k):
        b = np.int64(1) << j
        mask = np.concatenate([mask, mask | b, mask | b])
        sub = np.concatenate([sub, sub, sub | b])
    order = np.argsort(mask, kind="stable")
    mask, sub = mask[order], sub[order]
    starts = np.searchsorted(mask, np.arange(1 << k))
    return mask, sub, starts


def _best_completion(tables: Sequence[np.ndarray]) -> float:
    """max over disjoint X_1..X_n ⊆ [k] of sum_i tables[i][X_i] (tables monotone)."""
    k = len(tables[0]).bit_length() - 1
    g = np.asarray(tables[0], dtype=float)
    if len(tables) == 1:
        return float(g[-1])
    mask, sub, starts = _pairs(k)
    for t in tables[1:]:
        g = np.maximum.reduceat(t[sub] + g[mask ^ sub], starts)
    return float(g[-1])


def _bidder_tables(inst: Instance, objective: str) -> list[np.ndarray]:
    if objective not in ("sw", "lw"):
        raise ValueError(f"objective must be 'sw' or 'lw', got {objective!r}")
    out = []
    for b in inst.bidders:
        t = b.valuation.table
        out.append(np.minimum(t, b.budget) if objective == "lw" else t)
    return out


def _local(table: np.ndarray, fixed: int, free: list[int]) -> np.ndarray:
    k = len(free)
    glob = bit_matrix(k) @ (np.int64(1) << np.asarray(free, dtype=np.int64)) if k else np.zeros(1, np.int64)
    return table[fixed | glob.astype(np.int64)]


def _check_size(inst: Instance) -> None:
    if (inst.n + 1) ** inst.m > MAX_ASSIGNMENTS:
        raise SizeLimitError(f"(n+1)^m = {(inst.n + 1) ** inst.m} exceeds {MAX_ASSIGNMENTS}")


@dataclass(frozen=True)
class OptResult:
    value: float
    allocation: tuple[ItemSet, ...]
    objective: str


def opt_value(inst: Instance, objective: str = "lw") -> float:
    _check_size(inst)
    return _best_completion(_bidder_tables(inst, objective))


def opt_welfare(inst: Instance, objective: str = "lw") -> OptResult:
    """Exact optimum with the lexicographically smallest optimal assignment map.

    Assignment maps are compared item by item, with "unassigned" ordered
    before bidder 0, 1, ....
    """
    _check_size(inst)
    tables = _bidder_tables(inst, objective)
    best = _best_completion(tables)
    n, m = inst.n, inst.m
    fixed = [0] * n
    for j in range(m):
        free = list(range(j + 1, m))
        for choice in [None, *range(n)]:
            trial = list(fixed)
            if choice is not None:
                trial[choice] |= 1 << j
            got = _best_completion([_local(t, f, free) for t, f in zip(tables, trial)])
            if got >= best - TOL:
                fixed = trial
                break
    alloc = tuple(ItemSet(f, m) for f in fixed)
    return OptResult(best, alloc, objective)


def check_feasible(inst: Instance, alloc: Sequence[ItemSet]) -> None:
    if len(alloc) != inst.n:
        raise UniverseError(f"allocation has {len(alloc)} bundles for {inst.n} bidders")
    seen = 0
    for i, S in enumerate(alloc):
        if S.m != inst.m:
            raise UniverseError(f"bundle {i} is over {S.m} items, instance has {inst.m}")
        if seen & S.mask:
            raise ValueError(f"bundle {i} overlaps an earlier bundle")
        seen |= S.mask


def supporting_prices(inst: Instance, alloc: Sequence[ItemSet], liquid: bool = True) -> np.ndarray:
    """Per-item clause weight in the winner's (liquid) maximising clause."""
    check_feasible(inst, alloc)
    q = np.zeros(inst.m)
    for b, S in zip(inst.bidders, alloc):
        if not len(S):
            continue
        clause = liquid_xos_clause(b.valuation, b.budget, S) if liquid else xos_clause(b.valuation, S)
        for j in S:
            q[j] = clause[j]
    return q


@dataclass(frozen=True)
class ProfitReport:
    holds: bool
    bidder: int | None = None
    witness: ItemSet | None = None

    def __bool__(self) -> bool:
        return self.holds


def strongly_profitable(inst: Instance, alloc: Sequence[ItemSet], prices, tol: float = TOL) -> ProfitReport:
    """Every ``T ⊆ S_i`` has ``min(v_i(T), B_i) >= p(T)``."""
    check_feasible(inst, alloc)
    p = as_prices(prices, inst.m)
    for i, (b, S) in enumerate(zip(inst.bidders, alloc)):
        if len(S) > MAX_PROFIT_CHECK:
            raise SizeLimitError(f"strong profitability is checked for bundles of at most {MAX_PROFIT_CHECK} items")
        members = list(S.members)
        local = bit_matrix(len(members))
        glob = (local @ (np.int64(1) << np.asarray(members, dtype=np.int64))).astype(np.int64) if members else np.zeros(1, np.int64)
        cost = local @ p[members] if members else np.zeros(1)
        worth = np.minimum(b.valuation.table[glob], b.budget)
        bad = np.flatnonzero(worth < cost - tol)
        if bad.size:
            return ProfitReport(False, i, ItemSet(int(glob[bad[0]]), inst.m))
    return ProfitReport(True)


class UnsupportedPricesError(ValueError):
    def __init__(self, report: ProfitReport):
        super().__init__(f"prices do not support the allocation: bidder {report.bidder} "
                         f"values {report.witness} below its price")
        self.report = report


@dataclass(frozen=True)
class FixedPriceReport:
    passed: bool
    lw: float
    bound: float
    outcome: Outcome

    @property
    def slack(self) -> float:
        return self.lw - self.bound

    def __bool__(self) -> bool:
        return self.passed


def check_fixed_price_lemma(inst: Instance, alloc: Sequence[ItemSet], prices,
                            order: Sequence[int] | None = None, tol: float = TOL) -> FixedPriceReport:
    """Half-price fixed auction recovers a quarter of the supporting prices.

    Support is verified first; an unsupported price vector raises
    :class:`UnsupportedPricesError`.
    """
    p = as_prices(prices, inst.m)
    support = strongly_profitable(inst, alloc, p, tol)
    if not support:
        raise UnsupportedPricesError(support)
    out = fixed_price_auction(inst, p / 2, order)
    lw = outcome_welfare(inst, out).lw
    covered = sum(p[j] for S in alloc for j in S)
    bound = covered / 4
    return FixedPriceReport(lw >= bound - tol, lw, bound, out)


Mechanism = Callable[[Instance, CoinStream], Outcome]

VALUE_SCALES = (0.0, 0.25, 0.5, 2.0, 4.0)
BUDGET_SCALES = (0.0, 0.5, 2.0, math.inf)


def deviation_family(b: Bidder) -> list[tuple[str, Bidder]]:
    """Scaled valuations, clause-dropped XOS variants, budget misreports and all combinations."""
    vals = [("v", b.valuation)]
    vals += [(f"v*{s:g}", b.valuation.scaled(s)) for s in VALUE_SCALES]
    base = b.valuation.inner if isinstance(b.valuation, Capped) else b.valuation
    if isinstance(base, XOS) and len(base.clauses) > 1:
        vals += [(f"v-clause{k}", base.without_clause(k)) for k in range(len(base.clauses))]
    budgets = [("B", b.budget)]
    budgets += [(f"B*{s:g}", math.inf if s == math.inf else b.budget * s) for s in BUDGET_SCALES]
    out = []
    for vl, v in vals:
        for bl, B in budgets:
            if vl == "v" and bl == "B":
                continue
            out.append((f"{vl},{bl}", Bidder(v, B)))
    return out


@dataclass(frozen=True)
class DeviationReport:
    bidder: int
    tested: int
    excluded: int
    max_gain: float
    witness: str | None
    truthful_utility: float

    @property
    def passed(self) -> bool:
        return self.max_gain <= 1e-6

    def __bool__(self) -> bool:
        return self.passed


def _utility(b: Bidder, o: Outcome, i: int) -> float:
    return b.valuation.value(o.allocation[i]) - o.payments[i]


def audit_truthfulness(mechanism: Mechanism, inst: Instance, bidder: int, seed: int,
                       deviations: Sequence[tuple[str, Bidder]] | None = None,
                       tol: float = TOL) -> DeviationReport:
    """Replay ``mechanism`` under each misreport with the same coins.

    Utilities use the true valuation.  A deviation is compared only when
    its payment fits both the reported and the true budget; the truthful
    run must itself be budget feasible.
    """
    truth = inst.bidders[bidder]
    base = mechanism(inst, CoinStream(seed))
    if base.payments[bidder] > truth.budget + tol:
        raise AssertionError(f"truthful payment {base.payments[bidder]} exceeds budget {truth.budget}")
    u0 = _utility(truth, base, bidder)
    devs = deviation_family(truth) if deviations is None else deviations
    best, witness, excluded = -math.inf, None, 0
    for label, fake in devs:
        o = mechanism(inst.with_bidder(bidder, fake), CoinStream(seed))
        pay = o.payments[bidder]
        if pay > fake.budget + tol or pay > truth.budget + tol:
            excluded += 1
            continue
        gain = _utility(truth, o, bidder) - u0
        if gain > best:
            best, witness = gain, label
    if best == -math.inf:
        best = 0.0
    return DeviationReport(bidder, len(devs), excluded, best,
                           witness if best > 1e-6 else None, u0)
