"""Command-line front end.

Subcommands:
  exponent  print the closed-form query exponents for a pattern
  verify    materialize flow paths at small n and run every desk-scale audit
  compare   learning-graph exponents next to the database-walk costs
  optimize  numeric parameter search at a concrete n

Exit codes: 0 success, 2 input error, 3 infeasible parameters,
4 verification failure.  Identical invocations (including --seed) produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import rng as rng_mod
from .constructions import (
    audit_flow_path,
    exact_flow_probability,
    g1_stage_specs,
    g2_plan,
    materialize_flow_path,
    mc_flow_probability,
)
from .lemmas import (
    InfeasibleParameters,
    require_feasible,
    smallest_feasible_n,
    uniform_edge_probability,
)
from .optimizer import compare_with_walk, numeric_optimize, theorem3_exponent
from .optimizer import g1_exponents, g2_exponents, theorem1_total, theorem2_total
from .patterns import PatternError, parse_pattern

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFY = 4


def _load_pattern(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_pattern(handle.read())
    except OSError as exc:
        raise PatternError(f"cannot read {path}: {exc}") from exc


def _emit(report: dict, fmt: str, out) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=1, default=str), file=out)
        return
    # TSV: one section/key/value row per leaf entry, in insertion order
    def walk(prefix, node):
        if isinstance(node, dict):
            for key, value in node.items():
                walk(prefix + [str(key)], value)
        elif isinstance(node, (list, tuple)):
            for idx, value in enumerate(node):
                walk(prefix + [str(idx)], value)
        else:
            print("\t".join(prefix + [_fmt_value(node)]), file=out)

    walk([], report)


def _fmt_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def cmd_exponent(args, out) -> int:
    pattern = _load_pattern(args.pattern)
    result = theorem3_exponent(pattern)
    k, m, d = pattern.k, pattern.m, pattern.d
    print(
        f"theorem1 (direct, k={k}, m={m}): total={theorem1_total(k, m)}"
        f"≈{float(theorem1_total(k, m)):.6f}",
        file=out,
    )
    print(
        f"theorem2 (removal, k={k}, d={d}, m={m}): total={theorem2_total(k, d, m)}"
        f"≈{float(theorem2_total(k, d, m)):.6f}",
        file=out,
    )
    print(
        f"t={result.t} total={result.total}≈{float(result.total):.6f} "
        f"(branch {result.branch}; t1={result.t1}, t2={result.t2})",
        file=out,
    )
    # cross-check the closed forms against the balancing solver
    assert g1_exponents(pattern).total == theorem1_total(k, m)
    assert g2_exponents(pattern).total == theorem2_total(k, d, m)
    return EXIT_OK


def _verify_one(pattern, kind, n, r, s, lam, seed, samples, report):
    plan = g1_stage_specs(pattern, pattern.k) if kind == "g1" else g2_plan(pattern)
    witness = tuple(range(1, pattern.k + 1))
    failures = 0
    for i in range(samples):
        path = materialize_flow_path(
            plan, n, r, s, witness, rng_mod.child_seed(seed, kind, "path", i), lam=lam
        )
        problems = audit_flow_path(path)
        if problems:
            failures += 1
            report.setdefault("audit_failures", []).extend(
                f"{kind} path {i}: {p}" for p in problems[:5]
            )
    report[f"{kind}_paths"] = samples
    report[f"{kind}_audit_failures"] = failures

    # vertex-ratio checks on one representative path
    path = materialize_flow_path(
        plan, n, r, s, witness, rng_mod.child_seed(seed, kind, "ratio-path"), lam=lam
    )
    ratios = []
    ratio_failures = 0
    for stage in range(1, plan.u + 1):
        exact = exact_flow_probability(path, stage)
        estimate = mc_flow_probability(
            path, stage, samples, rng_mod.child_seed(seed, kind, "ratio", stage)
        )
        # binomial deviation under the exact probability (the estimate-based
        # standard error degenerates when no sample hits a rare event)
        sd = math.sqrt(float(exact) * (1 - float(exact)) / samples)
        ok = abs(estimate.value - float(exact)) <= 3 * sd + 1e-12
        if not ok:
            ratio_failures += 1
        ratios.append(
            {
                "stage": stage,
                "exact": f"{float(exact):.6g}",
                "estimate": f"{estimate.value:.6g}",
                "stderr": f"{estimate.stderr:.3g}",
                "ok": ok,
            }
        )
    report[f"{kind}_vertex_ratios"] = ratios
    report[f"{kind}_ratio_failures"] = ratio_failures
    return failures + ratio_failures


def cmd_verify(args, out) -> int:
    pattern = _load_pattern(args.pattern)
    kinds = ["g1", "g2"] if args.construction == "both" else [args.construction]
    r = args.r if args.r is not None else 4
    s = Fraction(args.s) if args.s is not None else Fraction(1, 2)
    u_needed = pattern.k if "g1" in kinds else pattern.k - 1
    n = args.n if args.n is not None else smallest_feasible_n(u_needed, pattern.k, r)
    for kind in kinds:
        u = pattern.k if kind == "g1" else pattern.k - 1
        require_feasible(r, s, n=int(n), u=u, k=pattern.k)
    report: dict = {
        "pattern": {"k": pattern.k, "edges": [list(e) for e in pattern.edges]},
        "n": int(n),
        "r": r,
        "s": str(s),
        "seed": args.seed,
        "samples": args.samples,
    }
    total_failures = 0
    for kind in kinds:
        total_failures += _verify_one(
            pattern, kind, int(n), r, s, args.lam, args.seed, args.samples, report
        )

    plain = uniform_edge_probability(r, s, mode="plain")
    hidden = uniform_edge_probability(
        r, s, mode="hidden", samples=max(args.samples, 1000), seed=rng_mod.child_seed(args.seed, "hidden")
    )
    report["edge_probability_plain"] = str(plain)
    report["edge_probability_hidden"] = {
        "estimate": f"{hidden.value:.6g}",
        "stderr": f"{hidden.stderr:.3g}",
        "threshold_s_over_4": f"{hidden.threshold:.6g}",
        "ok": hidden.ok,
    }
    if not hidden.ok:
        total_failures += 1
    report["ok"] = total_failures == 0
    _emit(report, args.format, out)
    return EXIT_OK if total_failures == 0 else EXIT_VERIFY


def cmd_compare(args, out) -> int:
    if os.path.isdir(args.pattern):
        files = sorted(
            os.path.join(args.pattern, name)
            for name in os.listdir(args.pattern)
            if name.endswith(".json")
        )
        if not files:
            raise PatternError(f"no .json pattern files in {args.pattern}")
        rows = []
        for path in files:
            pattern = _load_pattern(path)
            for row in compare_with_walk(pattern, n=args.n).rows:
                rows.append({"pattern": os.path.basename(path), **row})
        if args.format == "tsv":
            print("pattern\tname\texponent\texponent_float", file=out)
            for row in rows:
                print(
                    f"{row['pattern']}\t{row['name']}\t{row['exponent']}\t"
                    f"{row['exponent_float']:.6f}",
                    file=out,
                )
        else:
            print(json.dumps({"rows": rows}, indent=1, default=str), file=out)
        return EXIT_OK
    pattern = _load_pattern(args.pattern)
    table = compare_with_walk(pattern, n=args.n)
    print(table.to_tsv() if args.format == "tsv" else table.to_json(), file=out)
    return EXIT_OK


def cmd_optimize(args, out) -> int:
    pattern = _load_pattern(args.pattern)
    if args.n is None:
        raise PatternError("optimize needs --n")
    plan = g2_plan(pattern) if args.construction in ("g2", "both") else g1_stage_specs(
        pattern, pattern.k
    )
    result = numeric_optimize(plan, int(args.n), objective=args.objective)
    report = {"construction": plan.kind, "n": int(args.n), **result.to_dict()}
    _emit(report, args.format, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgsubgraph",
        description="Learning-graph complexity toolkit for constant-size subgraph finding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_n=False):
        p.add_argument("pattern", help='pattern JSON file: {"k": int, "edges": [[a,b], ...]}')
        p.add_argument("--n", type=float, default=None, help="host graph size")
        p.add_argument("--format", choices=("tsv", "json"), default="json")

    p_exp = sub.add_parser("exponent", help="closed-form query exponents")
    p_exp.add_argument("pattern")
    p_exp.set_defaults(func=cmd_exponent)

    p_ver = sub.add_parser("verify", help="materialize flow paths and audit them")
    add_common(p_ver)
    p_ver.add_argument("--r", type=int, default=None, help="class size parameter (even)")
    p_ver.add_argument("--s", type=str, default=None, help="block density (fraction, e.g. 1/2)")
    p_ver.add_argument("--lambda", dest="lam", type=int, default=None, help="collision fan-out")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--samples", type=int, default=200)
    p_ver.add_argument("--construction", choices=("g1", "g2", "both"), default="both")
    p_ver.set_defaults(func=cmd_verify)

    p_cmp = sub.add_parser("compare", help="learning graph vs database walk")
    add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_opt = sub.add_parser("optimize", help="numeric parameter search at concrete n")
    add_common(p_opt, needs_n=True)
    p_opt.add_argument("--construction", choices=("g1", "g2"), default="g2")
    p_opt.add_argument("--objective", choices=("max", "sum"), default="max")
    p_opt.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except PatternError as exc:
        print(f"error: {exc} (patterns need k >= 3 and no isolated vertices)", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleParameters as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
