"""Randomised property suites over the exact inequalities behind the guarantees.

Each suite draws its own cases from a seed and reports how many failed,
keeping the first failure for diagnosis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .bayes import DistributionSpec, BidderDistribution, estimate_prices, fixed_price_mechanism
from .cm import CmConfig, cm_mechanism, greedy_alloc
from .demand import verify_bcdq_lemma
from .engine import fixed_price_auction
from .generators import gen_instance, grid_uniform, random_additive, random_coverage, random_xos
from .kv import KvConfig, check_kv_lemmas, kv_mechanism
from .oracles import audit_truthfulness, check_fixed_price_lemma, opt_value, supporting_prices
from .valuations import Bidder, Instance, ItemSet, check_class, liquid

SUITES = ("lemma1", "lemma3", "kv-lemmas", "fixed-price", "truthfulness", "greedy")


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: int = 0
    first_failure: Any = None
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.failures == 0

    def record(self, ok: bool, detail: Any = None) -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            if self.first_failure is None:
                self.first_failure = detail

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = f"; first failure: {self.first_failure}" if self.failures else ""
        return f"[{status}] {self.name}: {self.cases - self.failures}/{self.cases} cases{tail}"


def _random_valuation(rng, m: int, family: str):
    if family == "additive":
        return random_additive(rng, m)
    if family == "xos":
        return random_xos(rng, m, clauses=int(rng.integers(1, 4)))
    return random_coverage(rng, m, elements=int(rng.integers(1, 7)))


FAMILY_CYCLE = ("additive", "xos", "coverage")


def lemma1_suite(count: int = 500, seed: int = 0, max_items: int = 6) -> SuiteResult:
    """Capping keeps coverage valuations submodular and XOS clause oracles valid."""
    res = SuiteResult("lemma1")
    rng = np.random.default_rng(seed)
    for _ in range(count):
        m = int(rng.integers(1, max_items + 1))
        cov = random_coverage(rng, m, elements=int(rng.integers(1, 7)))
        xos = random_xos(rng, m, clauses=int(rng.integers(1, 4)))
        for v, kind in ((cov, "coverage"), (xos, "xos")):
            top = v.value(ItemSet.full(m))
            for B in (0.0, top / 2, top, 2 * top):
                w = liquid(Bidder(v, B))
                checks = [check_class(w, "monotone"), check_class(w, "subadditive"),
                          check_class(w, "xos-dominated-by")]
                if kind == "coverage":
                    checks.append(check_class(w, "submodular"))
                for rep in checks:
                    res.record(rep.holds, (kind, v, B, rep))
    return res


def lemma3_suite(count: int = 1000, seed: int = 0, max_items: int = 8) -> SuiteResult:
    """Both BCDQ efficiency bounds against every alternative bundle."""
    res = SuiteResult("lemma3")
    rng = np.random.default_rng(seed)
    for t in range(count):
        m = int(rng.integers(1, max_items + 1))
        v = _random_valuation(rng, m, FAMILY_CYCLE[t % 3])
        top = v.value(ItemSet.full(m))
        B = float(grid_uniform(rng, 0, max(top, 1 / 64)))
        p = grid_uniform(rng, 0, 4, m)
        avail = ItemSet(int(rng.integers(0, 1 << m)), m)
        rep = verify_bcdq_lemma(v, B, avail, p)
        res.record(rep.passed, (v, B, avail, tuple(p), rep))
    return res


def random_instance(rng, max_items: int, max_bidders: int, family: str | None = None) -> Instance:
    m = int(rng.integers(1, max_items + 1))
    n = int(rng.integers(1, max_bidders + 1))
    fam = family or FAMILY_CYCLE[int(rng.integers(3))]
    return gen_instance(fam, {"n": n, "m": m}, int(rng.integers(2**31)))


def kv_lemmas_suite(count: int = 500, seed: int = 0, max_items: int = 6, max_bidders: int = 4) -> SuiteResult:
    res = SuiteResult("kv-lemmas")
    rng = np.random.default_rng(seed)
    while res.cases < count:
        inst = random_instance(rng, max_items, max_bidders)
        try:
            rep = check_kv_lemmas(inst)
        except ValueError:
            continue  # all-zero liquid values: L undefined
        res.record(rep.passed, (inst, rep.failures(), rep.checks))
    return res


def greedy_suite(count: int = 500, seed: int = 0, max_items: int = 6, max_bidders: int = 4) -> SuiteResult:
    """Item-greedy gets at least half the optimal liquid welfare on submodular instances."""
    res = SuiteResult("greedy")
    rng = np.random.default_rng(seed)
    for t in range(count):
        inst = random_instance(rng, max_items, max_bidders, ("additive", "coverage")[t % 2])
        g = greedy_alloc(inst)
        opt = opt_value(inst, "lw")
        res.record(2 * g.lw >= opt - 1e-9, (inst, g.lw, opt))
    return res


def fixed_price_suite(count: int = 200, seed: int = 0, max_items: int = 6, max_bidders: int = 4) -> SuiteResult:
    """Half-price fixed auctions on random allocations with (scaled) supporting prices."""
    res = SuiteResult("fixed-price")
    rng = np.random.default_rng(seed)
    for _ in range(count):
        inst = random_instance(rng, max_items, max_bidders)
        owner = rng.integers(-1, inst.n, inst.m)
        alloc = tuple(ItemSet.of(np.flatnonzero(owner == i), inst.m) for i in range(inst.n))
        prices = supporting_prices(inst, alloc, liquid=True) * float(rng.choice([1.0, rng.uniform(0, 1)]))
        order = [int(i) for i in rng.permutation(inst.n)]
        rep = check_fixed_price_lemma(inst, alloc, prices, order)
        res.record(rep.passed, (inst, alloc, tuple(prices), rep.lw, rep.bound))
    return res


def truthfulness_suite(instances: int = 100, seeds: int = 10, seed: int = 0,
                       m: int = 4, n: int = 3, mechanisms=("kv", "cm", "bayes-fixed-price")) -> SuiteResult:
    """Exhaustive replay of the structured deviation family for every bidder."""
    res = SuiteResult("truthfulness")
    rng = np.random.default_rng(seed)
    tested = 0
    for k in range(instances):
        fam = FAMILY_CYCLE[k % 3]
        inst = gen_instance(fam, {"n": n, "m": m}, int(rng.integers(2**31)))
        mechs = {}
        if "kv" in mechanisms:
            try:
                mechs["kv"] = kv_mechanism(KvConfig.for_instance(inst, q=0.5))
            except ValueError:
                pass
        if "cm" in mechanisms:
            mechs["cm"] = cm_mechanism(CmConfig(2.0))
        if "bayes-fixed-price" in mechanisms:
            dist = DistributionSpec(m, tuple(BidderDistribution("additive-iid-weights", {}, ("uniform", 0, 16))
                                             for _ in range(n)))
            prices = estimate_prices(dist, "exact", 20, int(rng.integers(2**31))).prices
            mechs["bayes-fixed-price"] = fixed_price_mechanism(prices)
        for s in range(seeds):
            for name, mech in mechs.items():
                for i in range(n):
                    rep = audit_truthfulness(mech, inst, i, s)
                    tested += rep.tested
                    res.record(rep.passed, (name, inst, i, s, rep))
    res.notes["deviations"] = tested
    return res


def run_suite(name: str, trials: int | None = None, seed: int = 0) -> SuiteResult:
    if name == "lemma1":
        return lemma1_suite(trials or 500, seed)
    if name == "lemma3":
        return lemma3_suite(trials or 1000, seed)
    if name == "kv-lemmas":
        return kv_lemmas_suite(trials or 500, seed)
    if name == "fixed-price":
        return fixed_price_suite(trials or 200, seed)
    if name == "truthfulness":
        return truthfulness_suite(trials or 100, 10, seed)
    if name == "greedy":
        return greedy_suite(trials or 500, seed)
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
