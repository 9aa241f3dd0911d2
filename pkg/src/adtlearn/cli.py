"""Command line interface: ``adtlearn learn|bench|ads|verify``.

Exit codes: 0 success, 1 machines not equivalent, 2 usage or runtime error.
"""

import argparse
import json
import sys

from . import ads as adsmod
from .adt import to_dot as adt_to_dot
from .harness import COLUMNS, BenchmarkConfig, RunError, run_benchmark, run_learning
from .mealy import MealyError, load_dot, save_dot, separating_word


def _target(path):
    if path == "coffee":
        from .fixtures import coffee_machine
        return coffee_machine()
    return load_dot(path)


def cmd_learn(args):
    machine = _target(args.target)
    captured = {}
    hyp, stats = run_learning(args.learner, machine, args.seed, args.oracle, debug=args.debug,
                              budget=args.budget, on_learner=lambda lr: captured.setdefault("learner", lr))
    if args.emit_hypothesis:
        save_dot(hyp, args.emit_hypothesis)
    if args.emit_adt:
        learner = captured.get("learner")
        if learner is None or not hasattr(learner, "adt"):
            raise RunError("--emit-adt needs an ADT learner")
        with open(args.emit_adt, "w", encoding="utf-8") as fh:
            fh.write(adt_to_dot(learner.adt.root, machine.inputs, machine.outputs))
    record = stats.as_dict()
    if args.stats:
        if args.stats.endswith(".json"):
            with open(args.stats, "w", encoding="utf-8") as fh:
                json.dump(record, fh, indent=2)
        else:
            with open(args.stats, "w", encoding="utf-8") as fh:
                fh.write(",".join(COLUMNS) + "\n")
                fh.write(",".join(str(x) for x in stats.row()) + "\n")
    print(" ".join(f"{c}={record[c]:.6g}" if isinstance(record[c], float) else f"{c}={record[c]}"
                   for c in COLUMNS))
    return 0 if stats.converged else 1


def cmd_bench(args):
    cfg = BenchmarkConfig.load(args.config)

    def progress(name, seed, result):
        if args.verbose:
            status = "ok" if result[3] is None else "error"
            print(f"{name} seed={seed} {status}", file=sys.stderr)

    results = run_benchmark(cfg, args.output, progress=progress)
    failed = sum(1 for r in results if r[3] is not None)
    print(f"{len(results)} runs, {failed} failed, table written to {args.output}")
    return 0 if failed == 0 else 2


def cmd_ads(args):
    m = _target(args.machine)
    states = range(m.num_states) if not args.states else [int(x) for x in args.states.split(",")]
    try:
        tree = adsmod.compute_ads(m, states, args.profile, args.budget, raise_on_failure=True,
                                  check_minimal=len(list(states)) == m.num_states)
    except adsmod.AdsError as exc:
        print(f"no ADS: {exc}", file=sys.stderr)
        return 1
    out = adt_to_dot(tree, m.inputs, m.outputs, name="ads")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    print(f"depth={adsmod.ads_depth(tree)} size={adsmod.ads_size(tree)}", file=sys.stderr)
    return 0


def cmd_verify(args):
    hyp = _target(args.hypothesis)
    target = _target(args.target)
    w = separating_word(target, hyp.relabel_outputs(target.outputs))
    if w is None:
        print("equivalent")
        return 0
    print("not equivalent: " + " ".join(target.inputs.decode(w)))
    return 1


def build_parser():
    p = argparse.ArgumentParser(prog="adtlearn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    lp = sub.add_parser("learn", help="learn one target machine")
    lp.add_argument("--target", required=True, help="DOT file of the target (or 'coffee')")
    lp.add_argument("--learner", default="ADT[NSE|NIR|NSR]", help="ADT[a|b|c] spec or DT")
    lp.add_argument("--oracle", default="exact", help="exact, expanded, random[:q:min:max], wp[:d], cache, or a comma list")
    lp.add_argument("--seed", type=int, default=0)
    lp.add_argument("--budget", type=int, default=None, help="ADS search node budget")
    lp.add_argument("--emit-hypothesis", metavar="DOT")
    lp.add_argument("--emit-adt", metavar="DOT")
    lp.add_argument("--stats", metavar="FILE", help="write statistics (.json or CSV)")
    lp.add_argument("--debug", action="store_true", help="verify the ADT after every change")
    lp.set_defaults(func=cmd_learn)

    bp = sub.add_parser("bench", help="run a benchmark described by a JSON file")
    bp.add_argument("config")
    bp.add_argument("-o", "--output", default="bench.csv")
    bp.add_argument("-v", "--verbose", action="store_true")
    bp.set_defaults(func=cmd_bench)

    ap = sub.add_parser("ads", help="compute an adaptive distinguishing sequence")
    ap.add_argument("machine", help="DOT file (or 'coffee')")
    ap.add_argument("--states", help="comma separated state indices (default: all)")
    ap.add_argument("--profile", choices=adsmod.PROFILES, default="BE")
    ap.add_argument("--budget", type=int, default=adsmod.DEFAULT_BUDGET)
    ap.add_argument("-o", "--output")
    ap.set_defaults(func=cmd_ads)

    vp = sub.add_parser("verify", help="check a hypothesis against a target")
    vp.add_argument("hypothesis")
    vp.add_argument("target")
    vp.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, MealyError, RunError, adsmod.AdsError) as exc:
        print(f"adtlearn: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
