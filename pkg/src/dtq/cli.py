"""Command-line front end.

Subcommands: ``count`` (exact class counts), ``sample`` (tree generation in
the text format), ``sens`` (exact average sensitivity of trees read from a
file), ``bound`` (closed-form bound evaluation as JSON), ``exp`` (the
experiment harness).

Exit codes: 0 all checks passed, 1 an experiment assertion or verification
failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .bounds import (
    leaf_depth_tail,
    loose_tail,
    mcdiarmid_tail,
    quantum_query_lower_bound,
    typical_sensitivity_tail,
)
from .combinatorics import (
    Model,
    RandomStream,
    count_labeled,
    count_min_depth_shapes,
    count_shapes,
    count_structures,
    sample,
)
from .harness import (
    EXPERIMENTS,
    ExperimentConfig,
    run_and_render,
    verify_report,
)
from .report import format_float, jsonable, parse_report
from .sensitivity import (
    avg_sensitivity_auto,
    avg_sensitivity_bruteforce,
    avg_sensitivity_structural,
    truth_table,
)
from .trees import parse, serialize, validate, variables_of

_MODEL_NAMES = [m.value for m in Model]


def _cmd_count(args) -> int:
    if args.klass == "shapes":
        print(count_shapes(args.d))
    elif args.klass == "structures":
        if args.vars is None:
            raise ValueError("--vars is required for structures")
        print(count_structures(args.d, args.vars))
    elif args.klass == "labeled":
        if args.vars is None:
            raise ValueError("--vars is required for labeled")
        print(count_labeled(args.d, args.vars))
    else:
        if args.h is None:
            raise ValueError("--h is required for mindepth")
        print(count_min_depth_shapes(args.d, args.h))
    return 0


def _cmd_sample(args) -> int:
    model = Model(args.model)
    master = RandomStream(args.seed)
    lines = []
    for i in range(args.count):
        tree = sample(model, args.d, args.vars, master.substream(i))
        lines.append(serialize(tree))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sens(args) -> int:
    with open(args.infile, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    for line in lines:
        tree = parse(line)
        problems = validate(tree, max(variables_of(tree), default=-1) + 1, 1 << 30)
        if problems:
            raise ValueError("; ".join(problems))
        if args.method == "structural":
            value = avg_sensitivity_structural(tree)
        elif args.method == "brute":
            n = max(variables_of(tree), default=-1) + 1
            value = avg_sensitivity_bruteforce(truth_table(tree, n))
        else:
            value = avg_sensitivity_auto(tree)
        print(f"{value} {format_float(float(value))}")
    return 0


def _cmd_bound(args) -> int:
    if args.bound == "query":
        value = quantum_query_lower_bound(args.sbar, args.eps)
        out = {"raw": value,
               "log2": math.log2(value) if value > 0 else None}
    elif args.bound == "mcdiarmid":
        b = mcdiarmid_tail(args.big_l, args.eta, args.delta)
        out = {"raw": b.raw, "clamped": b.clamped, "log2": b.log2}
    elif args.bound == "shallow":
        b = leaf_depth_tail(args.d, args.h)
        out = {"raw": b.raw, "clamped": b.clamped, "log2": b.log2,
               "in_range": b.in_range}
    elif args.bound == "tail":
        t = typical_sensitivity_tail(args.d, args.eps)
        out = _breakdown_dict(t)
    else:
        t = loose_tail(args.d, args.c)
        out = _breakdown_dict(t)
        out["c"] = args.c
    print(json.dumps(jsonable(out), indent=2))
    return 0


def _breakdown_dict(t) -> dict:
    def b(v):
        return {"raw": v.raw, "clamped": v.clamped, "log2": v.log2,
                "in_range": v.in_range}

    return {
        "threshold": t.threshold,
        "leaf_term": b(t.leaf_term),
        "concentration_term": b(t.concentration_term),
        "total": b(t.total),
    }


def _cmd_exp(args) -> int:
    config = ExperimentConfig(
        experiment=args.experiment,
        model=Model(args.model),
        d=args.d,
        n=args.vars,
        samples=args.samples,
        seed=args.seed,
        epsilon=args.eps,
        h=args.h,
        assignments=args.assignments,
        flips=args.flips,
        output=args.out,
        fmt=args.format,
        workers=args.workers,
    )
    report, text = run_and_render(config)
    if not args.out:
        sys.stdout.write(text)
    status = 0
    for a in report.assertions:
        mark = "PASS" if a["passed"] else "FAIL"
        print(f"{mark} {a['name']}: {a['detail']}", file=sys.stderr)
        if not a["passed"]:
            status = 1
    if args.verify:
        if verify_report(parse_report(text)):
            print("PASS verify: aggregates reproduce from records", file=sys.stderr)
        else:
            print("FAIL verify: aggregates do not reproduce from records",
                  file=sys.stderr)
            status = 1
    return status


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtq",
        description="Exact counting, uniform sampling, sensitivity analysis "
                    "and tail-bound experiments for bounded-depth decision trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="exact counts of tree classes")
    p.add_argument("--class", dest="klass", required=True,
                   choices=["shapes", "structures", "labeled", "mindepth"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--vars", type=int, default=None)
    p.add_argument("--h", type=int, default=None)
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("sample", help="draw trees and print the text format")
    p.add_argument("--model", required=True, choices=_MODEL_NAMES)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("sens", help="exact average sensitivity of trees in a file")
    p.add_argument("--in", dest="infile", required=True,
                   help="file with one tree per line in the text format")
    p.add_argument("--method", choices=["structural", "brute", "auto"],
                   default="auto")
    p.set_defaults(func=_cmd_sens)

    p = sub.add_parser("bound", help="evaluate a closed-form bound as JSON")
    bsub = p.add_subparsers(dest="bound", required=True)

    b = bsub.add_parser("query", help="quantum query lower bound from sbar")
    b.add_argument("--sbar", type=float, required=True)
    b.add_argument("--eps", type=float, default=1.0 / 3.0)
    b.set_defaults(func=_cmd_bound)

    b = bsub.add_parser("mcdiarmid", help="bounded-differences tail")
    b.add_argument("--L", dest="big_l", type=int, required=True)
    b.add_argument("--eta", type=float, required=True)
    b.add_argument("--delta", type=float, required=True)
    b.set_defaults(func=_cmd_bound)

    b = bsub.add_parser("shallow", help="shallow-leaf tail for uniform shapes")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--h", type=float, required=True)
    b.set_defaults(func=_cmd_bound)

    b = bsub.add_parser("tail", help="two-term tail on low avg sensitivity")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--eps", type=float, default=0.5)
    b.set_defaults(func=_cmd_bound)

    b = bsub.add_parser("loose", help="simpler two-term tail with cutoff d - c*log2(d)")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--c", type=int, default=2)
    b.set_defaults(func=_cmd_bound)

    p = sub.add_parser("exp", help="run an experiment and write its report")
    p.add_argument("experiment", choices=list(EXPERIMENTS))
    p.add_argument("--model", default=Model.FULL_UNIFORM.value,
                   choices=_MODEL_NAMES)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--vars", type=int, default=6)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--h", type=int, default=None)
    p.add_argument("--assignments", type=int, default=512)
    p.add_argument("--flips", type=int, default=32)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=_cmd_exp)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
