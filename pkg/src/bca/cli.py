"""Command-line entry point: ``bca {gen,run,check,opt,competitiveness}``.

Exit codes: 0 success, 1 invariant/property failure, 2 usage error.
``BCA_SEED`` overrides ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .bayes import DIST_FAMILIES, BidderDistribution, DistributionSpec
from .checks import SUITES, run_suite
from .cm import measure_competitiveness
from .generators import FAMILIES, gen_instance
from .harness import (MECHANISMS, ExperimentSpec, FormatError, load_distribution, load_instance,
                      run_experiment, save_distribution, save_instance)
from .oracles import opt_welfare


class UsageError(Exception):
    pass


def _kv(pairs: list[str]) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _seed(args) -> int:
    env = os.environ.get("BCA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"BCA_SEED must be an integer, got {env!r}") from None
    return args.seed


def _order(text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--order expects comma-separated bidder indices, got {text!r}") from None


def _budget(text: str | None) -> tuple:
    if text is None:
        return ("point", float("inf"))
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--budget expects B or lo,hi, got {text!r}") from None
    if len(vals) == 1:
        return ("point", vals[0])
    if len(vals) == 2:
        return ("uniform", *vals)
    raise UsageError(f"--budget expects B or lo,hi, got {text!r}")


def cmd_gen(args) -> int:
    params = _kv(args.param)
    for key in ("n", "m"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    seed = _seed(args)
    if args.dist:
        n, m = int(params.pop("n", 3)), int(params.pop("m", 4))
        budget = _budget(args.budget)
        dist = DistributionSpec(m, tuple(BidderDistribution(args.dist, params, budget) for _ in range(n)))
        save_distribution(dist, args.output)
    else:
        save_instance(gen_instance(args.family, params, seed), args.output)
    print(args.output)
    return 0


def cmd_run(args) -> int:
    seed = _seed(args)
    inst = dist = None
    if args.instance:
        inst = load_instance(args.instance)
    elif args.dist:
        dist = load_distribution(args.dist)
    elif args.family:
        inst = gen_instance(args.family, _kv(args.param), args.gen_seed)
    else:
        raise UsageError("run needs --instance, --dist or --family")
    params = {}
    if args.q is not None:
        params["q"] = args.q
    if args.beta is not None:
        params["beta"] = args.beta
    if args.k_samples is not None:
        params["k_samples"] = args.k_samples
    trace = None
    if args.trace:
        trace = (args.csv + ".trace.jsonl") if args.csv else "trace.jsonl"
    spec = ExperimentSpec(args.mechanism, inst, dist, params, args.trials, seed,
                          _order(args.order), args.csv, trace)
    try:
        spec.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows, summary = run_experiment(spec)
    out = {"trials": summary.trials, "mean_lw": summary.mean_lw, "se_lw": summary.se_lw,
           "mean_ratio": summary.mean_ratio, "min_ratio": summary.min_ratio,
           "violations": len(summary.violations)}
    print(json.dumps(out))
    for msg in summary.violations[:20]:
        print(f"violation: {msg}", file=sys.stderr)
    return 0 if summary.ok else 1


def cmd_check(args) -> int:
    res = run_suite(args.suite, args.trials, _seed(args))
    print(res.line())
    return 0 if res.passed else 1


def cmd_opt(args) -> int:
    inst = load_instance(args.file)
    res = opt_welfare(inst, args.objective)
    print(json.dumps({"objective": res.objective, "value": res.value,
                      "allocation": [list(S.members) for S in res.allocation]}))
    return 0


def cmd_competitiveness(args) -> int:
    inst = load_instance(args.file)
    if not 0 <= args.eps < 2:
        raise UsageError("--eps must lie in [0, 2)")
    c = measure_competitiveness(inst, args.eps, args.trials, _seed(args))
    print(json.dumps({"eps": c.eps, "trials": c.trials, "delta_hat": c.delta_hat,
                      "interval": list(c.interval), "both_retain": c.both_retain, "opt": c.opt}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bca", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write an instance or distribution file")
    g.add_argument("--family", choices=FAMILIES, default="additive")
    g.add_argument("--dist", choices=DIST_FAMILIES, help="write a distribution of this family instead")
    g.add_argument("--budget", help="distribution budget: B or lo,hi")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--param", action="append", help="extra generator parameter key=value")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run a mechanism over seeded trials")
    r.add_argument("mechanism", choices=MECHANISMS)
    r.add_argument("--instance")
    r.add_argument("--dist")
    r.add_argument("--family", choices=FAMILIES)
    r.add_argument("--param", action="append")
    r.add_argument("--gen-seed", type=int, default=0)
    r.add_argument("--q", type=float)
    r.add_argument("--beta", type=float)
    r.add_argument("--k-samples", type=int)
    r.add_argument("--trials", type=int, default=1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--order")
    r.add_argument("--trace", action="store_true")
    r.add_argument("--csv")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="run a property suite")
    c.add_argument("suite", choices=SUITES)
    c.add_argument("--trials", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check)

    o = sub.add_parser("opt", help="brute-force optimum of an instance file")
    o.add_argument("file")
    o.add_argument("--objective", choices=("lw", "sw"), default="lw")
    o.set_defaults(func=cmd_opt)

    k = sub.add_parser("competitiveness", help="estimate delta for a given eps")
    k.add_argument("file")
    k.add_argument("--eps", type=float, required=True)
    k.add_argument("--trials", type=int, default=1000)
    k.add_argument("--seed", type=int, default=0)
    k.set_defaults(func=cmd_competitiveness)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FormatError, FileNotFoundError, ValueError) as exc:
        print(f"bca: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
