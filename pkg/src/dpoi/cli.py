"""Batch command-line interface.

    dpoi check   FILE [--mode M] [--max-steps N] [--max-size N] [--jobs N]
                      [--json] [--dot DIR] [--empty-interface] [--max-pairs N]
    dpoi pairs   FILE [--mode M] [--json] [--dot DIR] [--empty-interface] [--max-pairs N]
    dpoi rewrite FILE (--term T | --graph GBLOCK) [--steps N] [--verify]
                      [--json] [--dot DIR]

Exit codes: 0 confluent, 1 not-confluent, 2 inconclusive, 10 usage error,
11 parse/type error.  Reports are deterministic for fixed inputs and caps,
up to the timing values under "stats".
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from dataclasses import replace
from typing import Optional

from .critical import (
    ConfluenceReport,
    PairResult,
    PreCriticalPair,
    check_joinable,
    decide_confluence,
    default_caps,
    iter_pre_critical_pairs,
    parallel_join,
)
from .dot import graph_to_dot, gwi_to_dot
from .engine import Caps, GraphWithInterface, RewritingSystem, enumerate_steps
from .hypergraph import GraphWithInterface as GWI
from .ma import decide_confluence_left_connected, is_left_connected
from .paths import decide_local_confluence_convex
from .rulefile import RuleFileError, _parse_graph_block, parse_rule_file
from .terms import TermSyntaxError, TermTypeError, parse_term, rewire

EXIT_CONFLUENT = 0
EXIT_NOT_CONFLUENT = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 10
EXIT_PARSE = 11


def _load_system(path: str, mode_flag: Optional[str]) -> RewritingSystem:
    with open(path, "r", encoding="utf-8") as fh:
        system = parse_rule_file(fh.read())
    if mode_flag:
        mode = {"plain": "plain-dpoi"}.get(mode_flag, mode_flag)
        system = RewritingSystem(system.signature, system.rules, mode=mode)
    return system


def _caps(args) -> Optional[Caps]:
    if args.max_steps is None and args.max_size is None:
        return None
    return Caps(
        max_steps=args.max_steps if args.max_steps is not None else 10_000,
        max_graph_size=args.max_size,
    )


def _pair_record(res: PairResult, index: int) -> dict:
    p = res.pair
    rec = {
        "index": index,
        "rules": [p.rule1, p.rule2],
        "kind": p.kind,
        "overlap_size": {"nodes": len(p.overlap.nodes), "edges": len(p.overlap.edges)},
        "shared_edges": p.overlap_edge_count(),
        "interface_size": len(p.interface.source.nodes),
        "parallel": p.parallel,
        "minimal": p.minimal,
        "joinable": res.joinability,
    }
    if res.witness is not None:
        rec["witness"] = {
            "nodes": len(res.witness.graph.nodes),
            "edges": len(res.witness.graph.edges),
        }
    return rec


def _report_json(report: ConfluenceReport, args) -> dict:
    return {
        "verdict": report.verdict,
        "mode": report.mode,
        "pairs": [_pair_record(r, i) for i, r in enumerate(report.pairs)],
        "caps": {
            "max_steps": report.caps.max_steps,
            "max_graph_size": report.caps.max_graph_size,
        },
        "truncated": report.truncated or report.enumeration_truncated,
        "termination_assumed": report.termination_assumed,
        "sigma_p_extension": report.sigma_p_extension,
        "stats": report.stats,
    }


def _emit_pair_dot(res: PairResult, index: int, dot_dir: str) -> None:
    p = res.pair
    base = os.path.join(dot_dir, f"pair{index:03d}")
    with open(base + "_overlap.dot", "w") as fh:
        fh.write(graph_to_dot(p.overlap, "overlap", p.interface))
    with open(base + "_left.dot", "w") as fh:
        fh.write(gwi_to_dot(p.branch1, "left"))
    with open(base + "_right.dot", "w") as fh:
        fh.write(gwi_to_dot(p.branch2, "right"))


def _verdict_exit(verdict: str) -> int:
    return {
        "confluent": EXIT_CONFLUENT,
        "not-confluent": EXIT_NOT_CONFLUENT,
        "inconclusive": EXIT_INCONCLUSIVE,
    }[verdict]


def _check_pair_worker(payload):
    system, pair, caps = payload
    return check_joinable(system, pair, caps)


def cmd_check(args) -> int:
    system = _load_system(args.file, args.mode)
    caps = _caps(args)
    if args.empty_interface:
        return _empty_interface_listing(system, args, caps, with_verdict=False)
    jobs = max(1, args.jobs)
    if jobs > 1 and system.mode != "convex":
        report = _check_parallel(system, caps, args)
    elif system.mode == "convex":
        if is_left_connected(system):
            report = decide_confluence_left_connected(
                system, caps, max_pairs=args.max_pairs
            )
        else:
            report = decide_local_confluence_convex(
                system, caps, max_pairs=args.max_pairs
            )
    else:
        report = decide_confluence(system, caps, max_pairs=args.max_pairs)
    payload = _report_json(report, args)
    _write_output(payload, report, args)
    return _verdict_exit(report.verdict)


def _check_parallel(system: RewritingSystem, caps, args) -> ConfluenceReport:
    """Pair checks fan out over processes; enumeration stays sequential."""
    import time

    t0 = time.perf_counter()
    pairs = []
    enumeration_truncated = False
    for i, pair in enumerate(iter_pre_critical_pairs(system)):
        if args.max_pairs is not None and i >= args.max_pairs:
            enumeration_truncated = True
            break
        pairs.append(pair)
    results: list[PairResult] = []
    fast: dict[int, PairResult] = {}
    todo = []
    for i, pair in enumerate(pairs):
        if pair.parallel:
            joined = parallel_join(system, pair)
            if joined is not None:
                fast[i] = PairResult(pair, "joinable", witness=joined[0], via="parallel")
                continue
        todo.append((i, pair))
    with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
        done = list(
            pool.map(
                _check_pair_worker,
                [(system, pair, caps or default_caps(pair)) for _, pair in todo],
            )
        )
    for (i, _), res in zip(todo, done):
        fast[i] = res
    results = [fast[i] for i in range(len(pairs))]
    truncated = any(r.joinability == "truncated" for r in results)
    from .critical import _report

    return _report(system.mode, results, caps, truncated, enumeration_truncated, t0)


def _empty_interface_listing(system, args, caps, with_verdict: bool) -> int:
    """Demonstration mode: classical pairs with an empty interface.  No
    confluence verdict is emitted for these (ground confluence is out of
    scope); pairs are listed with their joinability."""
    results = []
    count = 0
    for pair in iter_pre_critical_pairs(system, empty_interface=True):
        count += 1
        if args.max_pairs is not None and count > args.max_pairs:
            break
        results.append(check_joinable(system, pair, caps or default_caps(pair)))
    payload = {
        "verdict": None,
        "mode": system.mode,
        "empty_interface": True,
        "pairs": [_pair_record(r, i) for i, r in enumerate(results)],
        "stats": {"pairs_examined": len(results)},
    }
    if args.dot:
        os.makedirs(args.dot, exist_ok=True)
        for i, r in enumerate(results):
            _emit_pair_dot(r, i, args.dot)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_CONFLUENT


def cmd_pairs(args) -> int:
    system = _load_system(args.file, args.mode)
    caps = _caps(args)
    results = []
    count = 0
    truncated = False
    for pair in iter_pre_critical_pairs(system, empty_interface=args.empty_interface):
        count += 1
        if args.max_pairs is not None and count > args.max_pairs:
            truncated = True
            break
        # the pairs listing does not decide joinability
        results.append(PairResult(pair, "truncated"))
    payload = {
        "mode": system.mode,
        "empty_interface": args.empty_interface,
        "truncated": truncated,
        "pairs": [
            {**_pair_record(r, i), "joinable": None} for i, r in enumerate(results)
        ],
    }
    if args.dot:
        os.makedirs(args.dot, exist_ok=True)
        for i, r in enumerate(results):
            _emit_pair_dot(r, i, args.dot)
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for rec in payload["pairs"]:
            print(
                f"pair {rec['index']:3d}: {rec['rules'][0]} / {rec['rules'][1]}  "
                f"overlap {rec['overlap_size']['nodes']}n/{rec['overlap_size']['edges']}e  "
                f"shared {rec['shared_edges']}  interface {rec['interface_size']}  "
                f"{'parallel' if rec['parallel'] else 'overlapping'}"
                f"{'' if rec['minimal'] else ' (merged variant)'}"
            )
        print(f"total: {len(results)}{' (truncated)' if truncated else ''}")
    return EXIT_CONFLUENT


def cmd_rewrite(args) -> int:
    system = _load_system(args.file, args.mode)
    if (args.term is None) == (args.graph is None):
        print("rewrite needs exactly one of --term or --graph", file=sys.stderr)
        return EXIT_USAGE
    allow_frob = system.mode == "frobenius"
    if args.term is not None:
        term = parse_term(args.term)
        start = rewire(term, system.signature, True)
    else:
        start = _parse_graph_block(args.graph, system.signature, 1)
    trace = [start]
    current = start
    for _ in range(args.steps):
        steps = enumerate_steps(system, current)
        if not steps:
            break
        step = steps[0]
        if args.verify:
            errs = step.validate()
            if errs:
                print("step validation failed: " + "; ".join(errs), file=sys.stderr)
                return EXIT_INCONCLUSIVE
        current = step.result
        trace.append(current)
    successors = enumerate_steps(system, start)
    payload = {
        "mode": system.mode,
        "start": {"nodes": len(start.graph.nodes), "edges": len(start.graph.edges)},
        "trace_length": len(trace) - 1,
        "one_step_successors": len(successors),
        "normal_form": not enumerate_steps(system, current),
        "final": {
            "nodes": len(current.graph.nodes),
            "edges": len(current.graph.edges),
        },
    }
    if args.dot:
        os.makedirs(args.dot, exist_ok=True)
        for i, g in enumerate(trace):
            with open(os.path.join(args.dot, f"step{i:03d}.dot"), "w") as fh:
                fh.write(gwi_to_dot(g, f"step{i}"))
        for i, st in enumerate(successors):
            with open(os.path.join(args.dot, f"succ{i:03d}.dot"), "w") as fh:
                fh.write(gwi_to_dot(st.result, f"succ{i}"))
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(
            f"trace: {payload['trace_length']} step(s); "
            f"final graph {payload['final']['nodes']}n/{payload['final']['edges']}e; "
            f"{payload['one_step_successors']} one-step successor(s)"
            f"{'; normal form reached' if payload['normal_form'] else ''}"
        )
    return EXIT_CONFLUENT


def _write_output(payload: dict, report: ConfluenceReport, args) -> None:
    if args.dot:
        os.makedirs(args.dot, exist_ok=True)
        for i, r in enumerate(report.pairs):
            _emit_pair_dot(r, i, args.dot)
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"verdict: {payload['verdict']}  (mode {payload['mode']})")
        for rec in payload["pairs"]:
            tag = "parallel" if rec["parallel"] else "overlapping"
            print(
                f"  pair {rec['index']:3d} {rec['rules'][0]}/{rec['rules'][1]} "
                f"[{tag}] -> {rec['joinable']}"
            )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dpoi",
        description="hypergraph rewriting with interfaces and confluence checking",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (("check", cmd_check), ("pairs", cmd_pairs), ("rewrite", cmd_rewrite)):
        p = sub.add_parser(name)
        p.add_argument("file")
        p.add_argument("--mode", choices=["plain", "frobenius", "convex"])
        p.add_argument("--max-steps", type=int, default=None)
        p.add_argument("--max-size", type=int, default=None)
        p.add_argument("--max-pairs", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--dot", metavar="DIR")
        p.add_argument("--json", action="store_true")
        p.add_argument("--verify", action="store_true")
        p.add_argument("--empty-interface", action="store_true")
        if name == "rewrite":
            p.add_argument("--term")
            p.add_argument("--graph")
            p.add_argument("--steps", type=int, default=100)
        p.set_defaults(fn=fn)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuleFileError, TermSyntaxError, TermTypeError) as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
