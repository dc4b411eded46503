"""Competitive-market mechanism: price on a random half, sell to the other half."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from .engine import CoinStream, Outcome, Step, fixed_price_auction
from .oracles import opt_value, opt_welfare, supporting_prices
from .valuations import (MAX_CHECK_ITEMS, TOL, Additive, Capped, Coverage, Instance, ItemSet,
                         SizeLimitError, Valuation, check_class, liquid)


@dataclass(frozen=True)
class CmConfig:
    beta: float = 2.0
    alg_choice: str = "greedy"

    def __post_init__(self):
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        if self.alg_choice not in ("greedy", "exact"):
            raise ValueError(f"alg_choice must be 'greedy' or 'exact', got {self.alg_choice!r}")


@dataclass(frozen=True)
class GreedyResult:
    allocation: tuple[ItemSet, ...]
    contribution: tuple[float, ...]
    method: str = "greedy"

    @property
    def lw(self) -> float:
        return float(sum(self.contribution))


def _known_submodular(v: Valuation) -> bool:
    if isinstance(v, Capped):
        return _known_submodular(v.inner)
    return isinstance(v, (Additive, Coverage))


def liquid_submodular(inst: Instance) -> bool:
    """Whether every liquid valuation is submodular (by construction or exhaustive check)."""
    for b in inst.bidders:
        if _known_submodular(b.valuation):
            continue
        if inst.m > MAX_CHECK_ITEMS or not check_class(liquid(b), "submodular"):
            return False
    return True


def greedy_alloc(inst: Instance, alg_choice: str = "greedy") -> GreedyResult:
    """Item-by-item greedy on liquid marginal values, or the exact optimum.

    Greedy assigns items in ascending index to the bidder with the largest
    liquid marginal (lowest index on ties; zero marginal leaves the item
    unassigned).  With ``alg_choice="exact"`` the allocation is the
    brute-force liquid-welfare optimum and contributions are liquid clause
    weights.
    """
    m, n = inst.m, inst.n
    if alg_choice == "exact":
        alloc = opt_welfare(inst, "lw").allocation
        q = supporting_prices(inst, alloc, liquid=True)
        return GreedyResult(alloc, tuple(float(x) for x in q), "exact")
    if alg_choice != "greedy":
        raise ValueError(f"unknown alg_choice {alg_choice!r}")
    tables = [np.minimum(b.valuation.table, b.budget) for b in inst.bidders]
    held = [0] * n
    contrib = [0.0] * m
    for j in range(m):
        gains = [t[h | (1 << j)] - t[h] for t, h in zip(tables, held)]
        best = max(gains)
        if best <= TOL:
            continue
        i = next(i for i, g in enumerate(gains) if g >= best - TOL)
        held[i] |= 1 << j
        contrib[j] = float(gains[i])
    return GreedyResult(tuple(ItemSet(h, m) for h in held), tuple(contrib))


def split_bidders(n: int, coins: CoinStream) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Uniform split; the price-setting side gets ceil(n/2) bidders."""
    perm = coins.permutation(n)
    k = (n + 1) // 2
    return tuple(sorted(perm[:k])), tuple(sorted(perm[k:]))


def run_cm(inst: Instance, cfg: CmConfig, coins: CoinStream) -> Outcome:
    if inst.n < 2:
        raise ValueError("the competitive-market mechanism needs at least two bidders")
    S, T = split_bidders(inst.n, coins)
    sub = inst.restricted(S)
    choice = cfg.alg_choice
    if choice == "greedy" and not liquid_submodular(sub):
        choice = "exact"
    g = greedy_alloc(sub, choice)
    contrib = np.asarray(g.contribution)
    prices = contrib / (2 * cfg.beta)
    side = fixed_price_auction(inst.restricted(T), prices)
    m = inst.m
    alloc = [ItemSet.empty(m)] * inst.n
    pay = [0.0] * inst.n
    for local, i in enumerate(T):
        alloc[i] = side.allocation[local]
        pay[i] = side.payments[local]
    trace = tuple(replace(st, bidder=T[st.bidder]) for st in side.trace)
    meta = {"S": S, "T": T, "contributions": tuple(contrib), "prices": tuple(prices),
            # v(A_j)/beta: the supporting prices whose halves are posted
            "supporting_prices": tuple(contrib / cfg.beta), "alg": g.method}
    return Outcome(tuple(alloc), tuple(pay), trace, final_prices=tuple(prices),
                   queries=side.queries, meta=meta)


def cm_mechanism(cfg: CmConfig):
    def mech(inst: Instance, coins: CoinStream) -> Outcome:
        return run_cm(inst, cfg, coins)
    return mech


def cm_bound(eps: float, delta: float, beta: float) -> float:
    """Guaranteed fraction of the optimal liquid welfare, clamped at 0."""
    if not 0 <= eps < 2:
        raise ValueError(f"eps must lie in [0, 2), got {eps}")
    if not 0 <= delta <= 0.5:
        raise ValueError(f"delta must lie in [0, 1/2], got {delta}")
    if not beta > 1:
        raise ValueError(f"beta must exceed 1, got {beta}")
    val = (1 - 2 * delta) * (2 * (beta - 1) - eps * (3 * beta - 1)) / (16 * beta * (beta - 1))
    return max(val, 0.0)


@dataclass(frozen=True)
class Competitiveness:
    eps: float
    trials: int
    failures: int
    delta_hat: float
    interval: tuple[float, float]
    both_retain: float  # fraction of splits where both halves keep (1 - eps/2) OPT
    both_interval: tuple[float, float]
    opt: float


def measure_competitiveness(inst: Instance, eps: float, trials: int, seed: int,
                            max_items: int = 8, max_bidders: int = 6) -> Competitiveness:
    """Estimate how often a random half of the bidders loses more than eps/2 of OPT."""
    if not 0 <= eps < 2:
        raise ValueError(f"eps must lie in [0, 2), got {eps}")
    if trials < 1:
        raise ValueError("trials must be positive")
    if inst.m > max_items or inst.n > max_bidders:
        raise SizeLimitError(f"competitiveness is measured for m <= {max_items}, n <= {max_bidders}")
    opt = opt_value(inst, "lw")
    thresh = (1 - eps / 2) * opt - TOL

    @lru_cache(maxsize=None)
    def opt_of(idx: tuple[int, ...]) -> float:
        return opt_value(inst.restricted(idx), "lw") if idx else 0.0

    coins = CoinStream(seed)
    fail = both = 0
    for _ in range(trials):
        S, T = split_bidders(inst.n, coins)
        t_ok = opt_of(T) >= thresh
        fail += not t_ok
        both += t_ok and opt_of(S) >= thresh
    ci = binomtest(fail, trials).proportion_ci(0.95, method="exact")
    ci_both = binomtest(both, trials).proportion_ci(0.95, method="exact")
    return Competitiveness(eps, trials, fail, fail / trials, (ci.low, ci.high),
                           both / trials, (ci_both.low, ci_both.high), opt)
