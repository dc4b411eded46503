"""Worst-case O(log m) mechanism with doubling prices, and its overselling analysis run."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .engine import CoinStream, Outcome, doubling, outcome_welfare, run_posted_price
from .oracles import opt_value
from .valuations import TOL, ItemSet, Instance, SizeLimitError


def compute_L(inst: Instance) -> float:
    """Largest liquid value of the grand bundle over all bidders."""
    full = ItemSet.full(inst.m)
    L = max(min(b.valuation.value(full), b.budget) for b in inst.bidders)
    if L <= 0:
        raise ValueError("every bidder has zero liquid value for the full item set")
    return L


def default_q(m: int) -> float:
    if m < 1:
        raise ValueError("m must be positive")
    return 1.0 / (4 * (math.log2(4 * m) + 1))


@dataclass(frozen=True)
class KvConfig:
    L: float
    q: float
    order: tuple[int, ...] | None = None

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not 0 < self.q <= 1:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")

    @classmethod
    def for_instance(cls, inst: Instance, q: float | None = None,
                     order: Sequence[int] | None = None) -> "KvConfig":
        return cls(compute_L(inst), default_q(inst.m) if q is None else q,
                   None if order is None else tuple(order))


def initial_prices(m: int, L: float) -> np.ndarray:
    return np.full(m, L / (4 * m))


def run_kv(inst: Instance, cfg: KvConfig, coins: CoinStream) -> Outcome:
    out = run_posted_price(inst, cfg.order, initial_prices(inst.m, cfg.L), cfg.q, doubling,
                           "standard", coins)
    return replace(out, meta={"L": cfg.L, "q": cfg.q})


def kv_mechanism(cfg: KvConfig):
    """The mechanism as a ``(instance, coins) -> Outcome`` callable with L held fixed."""
    def mech(inst: Instance, coins: CoinStream) -> Outcome:
        return run_kv(inst, cfg, coins)
    return mech


def run_kv_overselling(inst: Instance, L: float, order: Sequence[int] | None = None) -> Outcome:
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    out = run_posted_price(inst, order, initial_prices(inst.m, L), 1.0, doubling,
                           "overselling", CoinStream(0))
    return replace(out, meta={"L": L, "q": 1.0})


@dataclass(frozen=True)
class KvLemmaReport:
    lw: float
    opt: float
    L: float
    price_sum: float
    copies: tuple[int, ...]
    copy_bound: float
    checks: dict[str, float]  # name -> slack (>= -tol means pass)
    tol: float = TOL

    @property
    def passed(self) -> bool:
        return all(s >= -self.tol for s in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, s in self.checks.items() if s < -self.tol]

    def __bool__(self) -> bool:
        return self.passed


def check_kv_lemmas(inst: Instance, L: float | None = None, opt: float | None = None,
                    max_items: int = 8, max_bidders: int = 4) -> KvLemmaReport:
    """Exact inequalities for the overselling run against the brute-force optimum.

    Checks ``lw >= sum(p) - L/4``, ``lw >= OPT - sum(p)``,
    ``lw >= 3/8 OPT``, the per-item copy bound and the closed form of the
    final prices.
    """
    if inst.m > max_items or inst.n > max_bidders:
        raise SizeLimitError(f"overselling checks are limited to m <= {max_items}, n <= {max_bidders}")
    L = compute_L(inst) if L is None else L
    opt = opt_value(inst, "lw") if opt is None else opt
    out = run_kv_overselling(inst, L)
    lw = outcome_welfare(inst, out).lw
    psum = float(sum(out.final_prices))
    bound = math.log2(4 * inst.m) + 2
    demands = [0] * inst.m
    for st in out.trace:
        for j in st.demand:
            demands[j] += 1
    closed = max(abs(p - L / (4 * inst.m) * 2 ** d) for p, d in zip(out.final_prices, demands))
    checks = {
        "price_sum": lw - (psum - L / 4),
        "opt_minus_prices": lw - (opt - psum),
        "three_eighths": lw - 3 * opt / 8,
        "copies": bound - max(out.copies),
        "price_closed_form": -closed,
    }
    return KvLemmaReport(lw, opt, L, psum, out.copies, bound, checks)
