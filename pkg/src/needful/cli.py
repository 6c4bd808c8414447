"""Command-line front end.

    needful normalize TERM [--variant sn|sn+|scbn2017] [--strategy leftmost|graph|random[:SEED]]
    needful machine TERM [--stats] [--machine-opt]
    needful check SUITE (--size N | --depth N) [--free K] [--es] [--jobs J]

Exit status: 0 on success, 1 on bad input or a failing check, 2 on timeout.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import threading

from . import harness, strong
from .machine import OPT_CAVEAT, Result as MachineResult, run as machine_run
from .terms import ParseError, parse, to_json, to_text, unfold

CALCULUS_COUNTING = "top-level dB/lsv applications"
MACHINE_COUNTING = "machine rule applications"


def default_fuel() -> int:
    raw = os.environ.get("NEEDFUL_FUEL")
    if not raw:
        return 1500
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"NEEDFUL_FUEL must be an integer, got {raw!r}")


def parse_strategy(text: str, node_cap: int):
    if text == "leftmost":
        return strong.Leftmost()
    if text == "graph":
        return strong.ExhaustiveGraph(node_cap)
    if text == "random" or text.startswith("random:"):
        _, _, seed = text.partition(":")
        return strong.RandomSeeded(int(seed) if seed else 0)
    raise argparse.ArgumentTypeError(f"unknown strategy {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="needful", description="Strong call-by-need toolkit")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True)

    n = sub.add_parser("normalize", help="normalize a term at top level")
    n.add_argument("term")
    n.add_argument("--variant", choices=[v.value for v in strong.Variant], default="sn+")
    n.add_argument("--strategy", default="leftmost",
                   help="leftmost, graph, or random[:SEED]")
    n.add_argument("--fuel", type=int, default=None)
    n.add_argument("--node-cap", type=int, default=10_000)
    n.add_argument("--trace", metavar="PATH", help="write the trace as JSON")
    n.add_argument("--unfold", action="store_true", help="also print the unfolding")
    n.add_argument("--lnf-omega-relaxed", action="store_true",
                   help="let unfrozen variables count as omega in the substitution gate")
    n.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    m = sub.add_parser("machine", help="run the abstract machine")
    m.add_argument("term")
    m.add_argument("--fuel", type=int, default=None)
    m.add_argument("--stats", action="store_true", help="print rule counts")
    m.add_argument("--machine-opt", action="store_true", help="use the optimized rules")
    m.add_argument("--unfold", action="store_true")
    m.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    c = sub.add_parser("check", help="run a harness suite and stream JSON lines")
    c.add_argument("suite")
    bound = c.add_mutually_exclusive_group(required=True)
    bound.add_argument("--size", type=int)
    bound.add_argument("--depth", type=int)
    c.add_argument("--free", type=int, default=0, help="number of free variables")
    c.add_argument("--es", action="store_true", help="include explicit substitutions")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--fuel", type=int, default=None)
    c.add_argument("--node-cap", type=int, default=10_000)
    c.add_argument("--variant", choices=[v.value for v in strong.Variant], default=None)
    c.add_argument("--machine-opt", action="store_true")
    c.add_argument("--mutated", action="store_true",
                   help="equivalence only: use a deliberately broken relation")
    c.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    return p


def _emit(obj, out):
    out.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _step_json(step: strong.Step) -> dict:
    return {"rule": step.rule, "path": list(step.path), "term": to_text(step.term)}


def cmd_normalize(args, out, err) -> int:
    t = parse(args.term)
    fuel = args.fuel if args.fuel is not None else default_fuel()
    strategy = parse_strategy(args.strategy, args.node_cap)
    result = strong.normalize(t, strong.Variant(args.variant), strategy, fuel,
                              relaxed_lnf=args.lnf_omega_relaxed)
    done = isinstance(result, strong.NF)
    header = {"counting": CALCULUS_COUNTING, "variant": args.variant,
              "strategy": args.strategy, "fuel": fuel}
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            json.dump({"header": header, "input": to_text(t),
                       "steps": [_step_json(s) for s in result.trace],
                       "status": "nf" if done else "timeout",
                       "result": to_text(result.term)}, fh, ensure_ascii=False, indent=1)
            fh.write("\n")
    if args.json:
        obj = dict(header, status="nf" if done else "timeout", term=to_text(result.term),
                   steps=result.steps)
        if done:
            if args.unfold:
                obj["unfold"] = to_text(unfold(result.term))
            if len(result.normal_forms) > 1:
                obj["normal_forms"] = [to_text(u) for u in result.normal_forms]
        _emit(obj, out)
    elif done:
        out.write(to_text(result.term) + "\n")
        if args.unfold:
            out.write(to_text(unfold(result.term)) + "\n")
        for other in result.normal_forms[1:]:
            out.write("also normal: " + to_text(other) + "\n")
        out.write(f"steps: {result.steps} ({CALCULUS_COUNTING})\n")
    else:
        err.write(f"timeout after {result.steps} steps ({CALCULUS_COUNTING})\n")
    return 0 if done else 2


def cmd_machine(args, out, err) -> int:
    t = parse(args.term)
    fuel = args.fuel if args.fuel is not None else default_fuel()
    result = machine_run(t, fuel, args.machine_opt)
    done = isinstance(result, MachineResult)
    stats = dict(sorted(result.stats.items()))
    extra = {"counting": MACHINE_COUNTING, "steps": result.steps}
    if args.machine_opt:
        extra["caveat"] = OPT_CAVEAT
    if result.diagnostics:
        extra["diagnostics"] = dict(result.diagnostics)
    if args.json:
        obj = {"status": "nf" if done else "timeout"}
        if done:
            obj["term"] = to_text(result.term)
            if args.unfold:
                obj["unfold"] = to_text(unfold(result.term))
        obj.update(extra)
        obj["stats"] = stats
        _emit(obj, out)
    else:
        if done:
            out.write(to_text(result.term) + "\n")
            if args.unfold:
                out.write(to_text(unfold(result.term)) + "\n")
        else:
            err.write(f"timeout after {result.steps} steps ({MACHINE_COUNTING})\n")
        if args.stats:
            _emit(dict(extra, stats=stats), out)
    return 0 if done else 2


def cmd_check(args, out, err) -> int:
    if args.suite not in harness.SUITES:
        err.write(f"unknown suite {args.suite!r}; choose from {', '.join(harness.SUITES)}\n")
        return 1
    fuel = args.fuel if args.fuel is not None else default_fuel()
    spec = harness.CorpusSpec(max_size=args.size, max_depth=args.depth,
                              free_var_count=args.free, allow_es=args.es, cap_fuel=fuel)
    options = {"node_cap": args.node_cap, "optimize": args.machine_opt,
               "mutated": args.mutated}
    if args.variant:
        options["variant"] = args.variant
    counts = {"pass": 0, "fail": 0, "skip": 0}
    for rec in harness.run_suite(args.suite, spec, args.jobs, options):
        counts[rec.verdict] += 1
        out.write(rec.to_json() + "\n")
    summary = dict(summary=args.suite, **counts)
    if args.json:
        _emit(summary, out)
    else:
        err.write(f"{args.suite}: {counts['pass']} pass, {counts['fail']} fail, "
                  f"{counts['skip']} skip\n")
    return 1 if counts["fail"] else 0


COMMANDS = {"normalize": cmd_normalize, "machine": cmd_machine, "check": cmd_check}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out, err)
    except ParseError as e:
        err.write(f"parse error: {e}\n")
        return 1


def in_big_stack(fn, *args, stack_mb: int = 512):
    """Call ``fn`` on a thread with a large stack; the term walkers recurse."""
    box = {}

    def target():
        try:
            box["value"] = fn(*args)
        except BaseException as e:  # re-raised in the caller
            box["error"] = e

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 200_000))
    old = threading.stack_size(stack_mb << 20)
    try:
        th = threading.Thread(target=target)
        th.start()
    finally:
        threading.stack_size(old)
    th.join()
    if "error" in box:
        raise box["error"]
    return box["value"]


def main(argv=None):
    sys.exit(in_big_stack(run, argv))


if __name__ == "__main__":
    main()
