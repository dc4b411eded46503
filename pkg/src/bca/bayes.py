"""Bayesian posted prices: half the expected per-item contribution to an optimal allocation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .cm import greedy_alloc
from .engine import CoinStream, Outcome, fixed_price_auction, outcome_welfare
from .generators import grid_uniform, random_additive, random_coverage, random_xos
from .oracles import opt_value, opt_welfare, supporting_prices
from .valuations import Bidder, Instance, ItemSet

# disjoint seed streams
GHOST_PRICES, GHOST_ALG, EVAL = 1, 2, 3

DIST_FAMILIES = ("additive-iid-weights", "xos-random-clauses", "coverage-random", "discrete")


@dataclass(frozen=True)
class BidderDistribution:
    """Generator for one bidder's (valuation, budget) pair.

    ``budget`` is ``("point", b)`` or ``("uniform", lo, hi)``; the uniform
    case is on the 1/64 grid.  The ``discrete`` family draws one of
    ``params["atoms"]``, a list of ``(probability, Bidder)`` pairs, and
    ignores ``budget``.
    """

    family: str
    params: Mapping[str, Any] = field(default_factory=dict)
    budget: tuple = ("point", math.inf)

    def __post_init__(self):
        if self.family not in DIST_FAMILIES:
            raise ValueError(f"unknown distribution family {self.family!r}")
        if self.family == "discrete":
            atoms = self.params.get("atoms")
            if not atoms:
                raise ValueError("a discrete distribution needs at least one atom")
            total = sum(p for p, _ in atoms)
            if any(p < 0 for p, _ in atoms) or not math.isclose(total, 1.0):
                raise ValueError("atom probabilities must be nonnegative and sum to 1")
        kind = self.budget[0]
        if kind == "point":
            if not self.budget[1] >= 0:
                raise ValueError("point budget must be nonnegative")
        elif kind == "uniform":
            lo, hi = self.budget[1:]
            if not 0 <= lo <= hi:
                raise ValueError("uniform budget range must satisfy 0 <= lo <= hi")
        else:
            raise ValueError(f"unknown budget distribution {kind!r}")

    def sample(self, rng: np.random.Generator, m: int) -> Bidder:
        p = dict(self.params)
        if self.family == "discrete":
            atoms = p["atoms"]
            k = int(rng.choice(len(atoms), p=[w for w, _ in atoms]))
            return atoms[k][1]
        lo, hi = p.pop("lo", 0.0), p.pop("hi", 8.0)
        if self.family == "additive-iid-weights":
            v = random_additive(rng, m, lo, hi)
        elif self.family == "xos-random-clauses":
            v = random_xos(rng, m, p.get("clauses", 3), lo, hi)
        else:
            v = random_coverage(rng, m, p.get("elements", 6), p.get("p", 0.4), lo, hi)
        if self.budget[0] == "point":
            B = self.budget[1]
        else:
            B = float(grid_uniform(rng, *self.budget[1:]))
        return Bidder(v, B)


def point_mass(b: Bidder) -> BidderDistribution:
    return BidderDistribution("discrete", {"atoms": [(1.0, b)]})


@dataclass(frozen=True)
class DistributionSpec:
    """Independent per-bidder distributions over a common item set."""

    m: int
    bidders: tuple[BidderDistribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "bidders", tuple(self.bidders))
        if not self.bidders:
            raise ValueError("a distribution needs at least one bidder")
        for d in self.bidders:
            if d.family == "discrete" and any(b.m != self.m for _, b in d.params["atoms"]):
                raise ValueError("discrete atoms must live on the distribution's item set")

    @property
    def n(self) -> int:
        return len(self.bidders)

    def sample(self, rng: np.random.Generator) -> Instance:
        return Instance(self.m, tuple(d.sample(rng, self.m) for d in self.bidders))

    @classmethod
    def point(cls, inst: Instance) -> "DistributionSpec":
        return cls(inst.m, tuple(point_mass(b) for b in inst.bidders))


def lw_contributions(inst: Instance, alloc: Sequence[ItemSet]) -> np.ndarray:
    """Liquid clause weight of each item in its winner's bundle; sums to the allocation's LW."""
    return supporting_prices(inst, alloc, liquid=True)


def alg_allocation(inst: Instance, alg: str) -> tuple[ItemSet, ...]:
    if alg == "exact":
        return opt_welfare(inst, "lw").allocation
    if alg == "greedy":
        return greedy_alloc(inst, "greedy").allocation
    raise ValueError(f"unknown algorithm {alg!r}")


def alg_value(inst: Instance, alg: str) -> float:
    if alg == "exact":
        return opt_value(inst, "lw")
    return greedy_alloc(inst, alg).lw


@dataclass(frozen=True)
class PriceEstimate:
    prices: np.ndarray
    samples_used: int
    stderr: np.ndarray


def estimate_prices(dist: DistributionSpec, alg: str = "exact", k: int = 100, seed: int = 0) -> PriceEstimate:
    if k < 1:
        raise ValueError("need at least one ghost sample")
    rng = np.random.default_rng([seed, GHOST_PRICES])
    rows = np.empty((k, dist.m))
    for t in range(k):
        ghost = dist.sample(rng)
        rows[t] = lw_contributions(ghost, alg_allocation(ghost, alg))
    prices = rows.mean(axis=0) / 2
    se = rows.std(axis=0, ddof=1) / math.sqrt(k) / 2 if k > 1 else np.zeros(dist.m)
    return PriceEstimate(prices, k, se)


def run_bayes(dist: DistributionSpec, prices, order: Sequence[int] | None = None,
              seed: int | Sequence[int] = 0) -> Outcome:
    """One fresh profile sold at fixed prices through budget-constrained demand queries."""
    key = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    profile = dist.sample(np.random.default_rng([*key, EVAL]))
    out = fixed_price_auction(profile, prices, order)
    return replace(out, meta={"profile": profile})


def fixed_price_mechanism(prices, order: Sequence[int] | None = None):
    """Fixed prices as an ``(instance, coins) -> Outcome`` mechanism (coins unused)."""
    def mech(inst: Instance, coins: CoinStream) -> Outcome:
        return fixed_price_auction(inst, prices, order)
    return mech


@dataclass(frozen=True)
class GuaranteeReport:
    mech_mean: float
    mech_se: float
    alg_mean: float
    alg_se: float
    trials: int
    prices: np.ndarray

    @property
    def ratio(self) -> float:
        return self.mech_mean / self.alg_mean if self.alg_mean > 0 else math.inf

    @property
    def combined_se(self) -> float:
        return math.hypot(self.mech_se, self.alg_se / 4)

    def holds(self, z: float = 3.0, slack: float = 0.0) -> bool:
        return self.mech_mean >= self.alg_mean / 4 - z * self.combined_se - slack - 1e-9


def _mean_se(xs: np.ndarray) -> tuple[float, float]:
    se = float(xs.std(ddof=1) / math.sqrt(xs.size)) if xs.size > 1 else 0.0
    return float(xs.mean()), se


def evaluate_guarantee(dist: DistributionSpec, alg: str = "exact", k_prices: int = 100,
                       trials: int = 1000, seed: int = 0, order: Sequence[int] | None = None,
                       prices=None) -> GuaranteeReport:
    """Mechanism LW on fresh profiles against ALG's LW on independent ghost profiles.

    ``prices`` overrides the estimated prices (e.g. to test perturbations).
    """
    if prices is None:
        prices = estimate_prices(dist, alg, k_prices, seed).prices
    prices = np.asarray(prices, dtype=float)
    mech = np.array([outcome_welfare(o.meta["profile"], o).lw
                     for o in (run_bayes(dist, prices, order, (seed, t)) for t in range(trials))])
    rng = np.random.default_rng([seed, GHOST_ALG])
    ref = np.array([alg_value(dist.sample(rng), alg) for _ in range(trials)])
    mm, ms = _mean_se(mech)
    am, as_ = _mean_se(ref)
    return GuaranteeReport(mm, ms, am, as_, trials, prices)
