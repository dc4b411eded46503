"""Instance/distribution files and seeded experiment runs with CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .bayes import BidderDistribution, DistributionSpec, estimate_prices, run_bayes
from .cm import CmConfig, run_cm
from .engine import CoinStream, Outcome, outcome_welfare
from .kv import KvConfig, compute_L, run_kv, run_kv_overselling
from .oracles import MAX_ASSIGNMENTS, opt_value
from .valuations import (TOL, XOS, Additive, Bidder, Capped, Coverage, Instance, ItemSet, Table,
                         Valuation)

MECHANISMS = ("kv", "kv-oversell", "cm", "bayes")
CSV_COLUMNS = ("seed", "mechanism", "n", "m", "lw", "sw", "revenue", "opt_lw", "ratio",
               "bcdq_count", "dq_count", "ms")


class FormatError(ValueError):
    """Malformed instance or distribution file."""

    def __init__(self, field: str, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {message}")
        self.field = field
        self.line = line


# -- serialisation -----------------------------------------------------------

def _num(x: float) -> float | str:
    return "inf" if x == math.inf else x


def valuation_to_json(v: Valuation) -> dict:
    if isinstance(v, Additive):
        return {"type": "additive", "weights": list(v.weights)}
    if isinstance(v, XOS):
        return {"type": "xos", "clauses": [list(c) for c in v.clauses]}
    if isinstance(v, Coverage):
        return {"type": "coverage", "covers": [sorted(c) for c in v.covers],
                "element_weights": list(v.element_weights)}
    if isinstance(v, Capped):
        return {"type": "capped", "inner": valuation_to_json(v.inner), "cap": _num(v.cap)}
    if isinstance(v, Table):
        return {"type": "table", "values": list(v.values)}
    raise TypeError(f"cannot serialise {type(v).__name__}")


def bidder_to_json(b: Bidder) -> dict:
    return {"budget": _num(b.budget), "valuation": valuation_to_json(b.valuation)}


def instance_to_json(inst: Instance) -> dict:
    return {"m": inst.m, "bidders": [bidder_to_json(b) for b in inst.bidders]}


def dist_to_json(d: DistributionSpec) -> dict:
    out = []
    for bd in d.bidders:
        params = dict(bd.params)
        if bd.family == "discrete":
            params["atoms"] = [[p, bidder_to_json(b)] for p, b in params["atoms"]]
        out.append({"family": bd.family, "params": params,
                    "budget": [bd.budget[0], *map(_num, bd.budget[1:])]})
    return {"m": d.m, "bidders": out}


def _get(obj: Any, key: str, path: str, kind=None):
    if not isinstance(obj, dict):
        raise FormatError(path, "expected an object")
    if key not in obj:
        raise FormatError(f"{path}.{key}" if path else key, "missing field")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise FormatError(f"{path}.{key}" if path else key, f"expected a {kind.__name__}")
    return val


def _number(x: Any, path: str, nonneg: bool = True) -> float:
    if x == "inf":
        return math.inf
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FormatError(path, f"expected a number, got {x!r}")
    if nonneg and not x >= 0:
        raise FormatError(path, f"must be nonnegative, got {x!r}")
    return float(x)


def _vector(xs: Any, path: str, length: int | None = None) -> tuple[float, ...]:
    if not isinstance(xs, list):
        raise FormatError(path, "expected an array")
    if length is not None and len(xs) != length:
        raise FormatError(path, f"expected {length} entries, got {len(xs)}")
    return tuple(_number(x, f"{path}[{k}]") for k, x in enumerate(xs))


def valuation_from_json(obj: Any, m: int, path: str = "valuation") -> Valuation:
    kind = _get(obj, "type", path, str)
    if kind == "additive":
        return Additive(_vector(_get(obj, "weights", path), f"{path}.weights", m))
    if kind == "xos":
        clauses = _get(obj, "clauses", path, list)
        if not clauses:
            raise FormatError(f"{path}.clauses", "needs at least one clause")
        return XOS(tuple(_vector(c, f"{path}.clauses[{k}]", m) for k, c in enumerate(clauses)))
    if kind == "coverage":
        ew = _vector(_get(obj, "element_weights", path), f"{path}.element_weights")
        covers = _get(obj, "covers", path, list)
        if len(covers) != m:
            raise FormatError(f"{path}.covers", f"expected {m} entries, got {len(covers)}")
        out = []
        for j, c in enumerate(covers):
            if not isinstance(c, list) or any(not isinstance(e, int) or not 0 <= e < len(ew) for e in c):
                raise FormatError(f"{path}.covers[{j}]", "expected element indices into element_weights")
            out.append(frozenset(c))
        return Coverage(tuple(out), ew)
    if kind == "capped":
        inner = valuation_from_json(_get(obj, "inner", path), m, f"{path}.inner")
        return Capped(inner, _number(_get(obj, "cap", path), f"{path}.cap"))
    if kind == "table":
        vals = _vector(_get(obj, "values", path), f"{path}.values", 1 << m)
        if vals[0] != 0:
            raise FormatError(f"{path}.values[0]", "value of the empty set must be 0")
        return Table(vals)
    raise FormatError(f"{path}.type", f"unknown valuation type {kind!r}")


def bidder_from_json(obj: Any, m: int, path: str) -> Bidder:
    B = _number(_get(obj, "budget", path), f"{path}.budget")
    return Bidder(valuation_from_json(_get(obj, "valuation", path), m, f"{path}.valuation"), B)


def _m(obj: Any) -> int:
    m = _get(obj, "m", "")
    if isinstance(m, bool) or not isinstance(m, int) or not 1 <= m <= 24:
        raise FormatError("m", f"expected an integer in [1, 24], got {m!r}")
    return m


def instance_from_json(obj: Any) -> Instance:
    m = _m(obj)
    bidders = _get(obj, "bidders", "", list)
    if not bidders:
        raise FormatError("bidders", "needs at least one bidder")
    return Instance(m, tuple(bidder_from_json(b, m, f"bidders[{i}]") for i, b in enumerate(bidders)))


def dist_from_json(obj: Any) -> DistributionSpec:
    m = _m(obj)
    rows = _get(obj, "bidders", "", list)
    out = []
    for i, row in enumerate(rows):
        path = f"bidders[{i}]"
        family = _get(row, "family", path, str)
        params = dict(row.get("params", {}))
        if family == "discrete":
            atoms = params.get("atoms")
            if not isinstance(atoms, list):
                raise FormatError(f"{path}.params.atoms", "expected an array of [probability, bidder]")
            params["atoms"] = [(_number(a[0], f"{path}.params.atoms[{k}][0]"),
                                bidder_from_json(a[1], m, f"{path}.params.atoms[{k}][1]"))
                               for k, a in enumerate(atoms)]
        budget = row.get("budget", ["point", "inf"])
        budget = (budget[0], *(_number(x, f"{path}.budget[{k + 1}]") for k, x in enumerate(budget[1:])))
        try:
            out.append(BidderDistribution(family, params, budget))
        except ValueError as exc:
            raise FormatError(path, str(exc)) from None
    try:
        return DistributionSpec(m, tuple(out))
    except ValueError as exc:
        raise FormatError("bidders", str(exc)) from None


def _load(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("<document>", exc.msg, exc.lineno) from None


def _wrap(fn, obj):
    try:
        return fn(obj)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError("<document>", str(exc)) from None


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_json(inst), indent=1) + "\n")


def load_instance(path: str | Path) -> Instance:
    return _wrap(instance_from_json, _load(path))


def save_distribution(d: DistributionSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dist_to_json(d), indent=1) + "\n")


def load_distribution(path: str | Path) -> DistributionSpec:
    return _wrap(dist_from_json, _load(path))


# -- experiments -------------------------------------------------------------

@dataclass
class ExperimentSpec:
    mechanism: str
    instance: Instance | None = None
    distribution: DistributionSpec | None = None
    params: dict[str, float] = field(default_factory=dict)
    trials: int = 1
    seed_base: int = 0
    order: tuple[int, ...] | None = None
    csv_path: str | Path | None = None
    trace_path: str | Path | None = None

    ALLOWED = {"kv": {"q"}, "kv-oversell": set(), "cm": {"beta"}, "bayes": {"k_samples"}}

    def validate(self) -> None:
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism {self.mechanism!r}; expected one of {MECHANISMS}")
        if self.trials < 1:
            raise ValueError("trial count must be at least 1")
        extra = set(self.params) - self.ALLOWED[self.mechanism]
        if extra:
            raise ValueError(f"parameters {sorted(extra)} do not apply to mechanism {self.mechanism}")
        if self.mechanism == "bayes":
            if self.distribution is None and self.instance is None:
                raise ValueError("bayes needs a distribution or an instance")
        elif self.instance is None:
            raise ValueError(f"{self.mechanism} needs an instance")
        if "q" in self.params and not 0 < self.params["q"] <= 1:
            raise ValueError("q must lie in (0, 1]")
        if "beta" in self.params and not self.params["beta"] > 1:
            raise ValueError("beta must exceed 1")
        if "k_samples" in self.params and not int(self.params["k_samples"]) >= 1:
            raise ValueError("k_samples must be at least 1")
        if self.mechanism == "cm" and self.instance.n < 2:
            raise ValueError("cm needs at least two bidders")


@dataclass(frozen=True)
class ResultRow:
    seed: int
    mechanism: str
    n: int
    m: int
    lw: float
    sw: float
    revenue: float
    opt_lw: float | None
    ratio: float | None
    bcdq_count: int
    dq_count: int
    ms: float

    def csv_fields(self) -> list[str]:
        def f(x):
            return "" if x is None else repr(float(x))
        return [str(self.seed), self.mechanism, str(self.n), str(self.m), f(self.lw), f(self.sw),
                f(self.revenue), f(self.opt_lw), f(self.ratio), str(self.bcdq_count),
                str(self.dq_count), f"{self.ms:.3f}"]


@dataclass(frozen=True)
class Summary:
    trials: int
    mean_lw: float
    se_lw: float
    mean_ratio: float | None
    min_ratio: float | None
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def invariant_violations(inst: Instance, o: Outcome, opt: float | None) -> list[str]:
    bad = []
    seen = 0
    for i, (b, R, pay) in enumerate(zip(inst.bidders, o.allocation, o.payments)):
        if o.mode == "standard":
            if seen & R.mask:
                bad.append(f"bidder {i} bundle overlaps another")
            seen |= R.mask
        if pay > b.budget + TOL:
            bad.append(f"bidder {i} pays {pay} over budget {b.budget}")
        if b.valuation.value(R) - pay < -TOL:
            bad.append(f"bidder {i} has negative utility")
        if pay < -TOL:
            bad.append(f"bidder {i} has a negative payment")
    w = outcome_welfare(inst, o)
    if w.revenue > w.lw + TOL:
        bad.append("revenue exceeds liquid welfare")
    if opt is not None and o.mode == "standard" and w.lw > opt + TOL:
        bad.append("liquid welfare exceeds the optimum")
    return bad


def _opt_or_none(inst: Instance) -> float | None:
    if (inst.n + 1) ** inst.m > MAX_ASSIGNMENTS:
        return None
    return opt_value(inst, "lw")


def _trace_record(seed: int, inst: Instance, o: Outcome) -> dict:
    return {
        "seed": seed,
        "instance": instance_to_json(inst),
        "steps": [{"bidder": s.bidder, "prices": list(s.prices), "demand": list(s.demand.members),
                   "coin": s.coin, "allocated": list(s.allocated.members)} for s in o.trace],
    }


def welfare_from_trace(record: Mapping) -> tuple[float, float, float]:
    """Recompute (sw, lw, revenue) from a persisted trace record."""
    inst = instance_from_json(record["instance"])
    sw = lw = rev = 0.0
    for st in record["steps"]:
        b = inst.bidders[st["bidder"]]
        R = ItemSet.of(st["allocated"], inst.m)
        x = b.valuation.value(R)
        sw += x
        lw += min(x, b.budget)
        rev += sum(st["prices"][j] for j in st["allocated"])
    return sw, lw, rev


def run_experiment(spec: ExperimentSpec) -> tuple[list[ResultRow], Summary]:
    """Run ``spec.trials`` seeded trials; seeds are ``seed_base + t``."""
    spec.validate()
    mech = spec.mechanism
    rows: list[ResultRow] = []
    traces: list[dict] = []
    violations: list[str] = []
    fixed_opt = None
    if mech != "bayes":
        inst = spec.instance
        fixed_opt = _opt_or_none(inst)
    if mech == "kv":
        cfg = KvConfig(compute_L(inst), spec.params.get("q", KvConfig.for_instance(inst).q), spec.order)
    elif mech == "cm":
        cmcfg = CmConfig(spec.params.get("beta", 2.0))
    elif mech == "bayes":
        dist = spec.distribution or DistributionSpec.point(spec.instance)
        k = int(spec.params.get("k_samples", 100))
        prices = estimate_prices(dist, "exact", k, spec.seed_base).prices
    for t in range(spec.trials):
        seed = spec.seed_base + t
        start = time.perf_counter()
        if mech == "kv":
            o = run_kv(inst, cfg, CoinStream(seed))
        elif mech == "kv-oversell":
            o = run_kv_overselling(inst, compute_L(inst), spec.order)
        elif mech == "cm":
            o = run_cm(inst, cmcfg, CoinStream(seed))
        else:
            o = run_bayes(dist, prices, spec.order, seed)
            inst = o.meta["profile"]
        ms = (time.perf_counter() - start) * 1e3
        opt = fixed_opt if mech != "bayes" else _opt_or_none(inst)
        w = outcome_welfare(inst, o)
        ratio = None if opt is None else (w.lw / opt if opt > 0 else 1.0)
        rows.append(ResultRow(seed, mech, inst.n, inst.m, w.lw, w.sw, w.revenue, opt, ratio,
                              o.queries.bcdq_count, o.queries.dq_count, ms))
        violations += [f"seed {seed}: {msg}" for msg in invariant_violations(inst, o, opt)]
        if spec.trace_path is not None:
            traces.append(_trace_record(seed, inst, o))
    lws = np.array([r.lw for r in rows])
    ratios = [r.ratio for r in rows if r.ratio is not None]
    summary = Summary(
        len(rows), float(lws.mean()),
        float(lws.std(ddof=1) / math.sqrt(lws.size)) if lws.size > 1 else 0.0,
        float(np.mean(ratios)) if ratios else None,
        float(min(ratios)) if ratios else None,
        tuple(violations))
    if spec.csv_path is not None:
        write_csv(rows, spec.csv_path)
    if spec.trace_path is not None:
        with open(spec.trace_path, "w") as fh:
            for rec in traces:
                fh.write(json.dumps(rec) + "\n")
    return rows, summary


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def write_csv(rows: Iterable[ResultRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))
