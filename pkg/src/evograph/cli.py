"""``evograph`` command line.

Exit codes: 0 success, 1 verification mismatch, 2 usage or configuration
error, 3 I/O or parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .engine import Scheduler
from .errors import DuplicateEdge, GraphError, ParseError
from .graph import read_edge_list
from .programs import PROGRAMS
from .store import EvolvingGraphStore, Interval
from .synthetic import extend_store
from .trigrid import direct_hop_schedule, dump_schedule, materialize_batches, work_sharing_schedule

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _window(text: str) -> Interval:
    try:
        return Interval.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad window {text!r}: {exc}") from None


def _fraction(text: str) -> float:
    x = float(text)
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError("add fraction must lie in [0, 1]")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evograph", description="Monotone queries over evolving graph snapshots.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, window=True):
        sp.add_argument("--store", type=Path, required=True, help="store directory")
        if window:
            sp.add_argument("--window", type=_window, default=None, help="LO:HI snapshot range (default: all)")

    sp = sub.add_parser("ingest", help="create a store from an edge-list file")
    sp.add_argument("edges", type=Path)
    common(sp, window=False)

    sp = sub.add_parser("gen-batches", help="append seeded random transitions")
    common(sp, window=False)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--batch-size", type=int, default=1000)
    sp.add_argument("--add-fraction", type=_fraction, default=0.5)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("schedule", help="show the evaluation schedule and its cost")
    common(sp)
    sp.add_argument("--engine", choices=["direct-hop", "work-sharing"], default="work-sharing")
    sp.add_argument("--out", type=Path, default=None, help="write the schedule document here")
    sp.add_argument("--edges", action="store_true", help="include batch edges in the document")
    sp.add_argument("--deletion-cost", type=float, default=1.0,
                    help="cost multiplier for deletions in the streaming comparison figure")

    for name, helptext in (("query", "evaluate queries on every snapshot of a window"),
                           ("verify", "check engines against from-scratch evaluation")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--algo", choices=[*PROGRAMS, "all"], default="all" if name == "verify" else "bfs")
        sp.add_argument("--source", type=int, default=0)
        sp.add_argument("--engine", choices=[*harness.ENGINES, "all"], default="all" if name == "verify" else "work-sharing")
        sp.add_argument("--mode", choices=["auto", "sync", "async"], default="auto", help="scheduler mode")
        sp.add_argument("--threads", type=int, default=1)
        if name == "query":
            sp.add_argument("--out", type=Path, required=True)
            sp.add_argument("--seed", type=int, default=0)
        else:
            sp.add_argument("--results", type=Path, default=None, help="verify result files written by query")
    return p


def cmd_ingest(args) -> int:
    edges, V = read_edge_list(args.edges)
    store = EvolvingGraphStore(edges, max(V, 0))
    store.save(args.store)
    print(f"ingested {len(edges)} edges over {store.vertex_count} vertices into {args.store}")
    return EXIT_OK


def cmd_gen_batches(args) -> int:
    store = EvolvingGraphStore.load(args.store)
    ids = extend_store(store, args.count, args.batch_size, args.add_fraction, args.seed)
    store.save(args.store)
    print(f"appended {len(ids)} snapshots; store now holds {store.n}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    store = EvolvingGraphStore.load(args.store)
    window = harness.check_window(store, args.window)
    direct = direct_hop_schedule(store, window)
    shared = work_sharing_schedule(store, window)
    chosen = direct if args.engine == "direct-hop" else shared
    if args.edges:
        chosen = materialize_batches(store, chosen)
    doc = dump_schedule(chosen, include_edges=args.edges)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(doc)
    else:
        sys.stdout.write(doc)
    adds = sum(len(store.transitions[t].additions) for t in range(window.lo, window.hi))
    dels = sum(len(store.transitions[t].deletions) for t in range(window.lo, window.hi))
    print(f"window {window}: {len(window)} snapshots")
    print(f"work-sharing cost: {shared.total_cost}")
    print(f"direct-hop cost: {direct.total_cost}")
    print(f"streaming changes: {adds} additions, {dels} deletions "
          f"(weighted cost {adds + args.deletion_cost * dels:g})")
    return EXIT_OK


def _config(args) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        store=args.store, window=args.window, algorithm=args.algo, source=args.source,
        engine=args.engine, seed=getattr(args, "seed", 0), threads=args.threads, mode=args.mode,
    )


def cmd_query(args) -> int:
    config = _config(args)
    runs = harness.run_query(config, args.out)
    for (algo, engine), run in runs.items():
        total = sum(r.edge_fn_applications for r in run.timing)
        print(f"{algo} {engine}: {len(run.results)} snapshots, {total} edge-function applications")
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _config(args)
    store = EvolvingGraphStore.load(config.store)
    algorithms, engines = config.algorithms(), config.engines()
    if args.results is not None:
        # "all" means whatever query wrote; an explicit choice must exist
        if args.algo == "all":
            algorithms = [a for a in algorithms if (args.results / a).is_dir()]
        if args.engine == "all":
            engines = [e for e in engines if any((args.results / a / e).is_dir() for a in algorithms)]
        if not algorithms or not engines:
            raise FileNotFoundError(f"no query results under {args.results}")
    failures = []
    for algo in algorithms:
        present = engines
        if args.results is not None and args.engine == "all":
            present = [e for e in engines if (args.results / algo / e).is_dir()]
        failures += harness.verify(store, config.window, [algo], config.source, present,
                                   Scheduler(config.mode), args.results)
    return EXIT_MISMATCH if failures else EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "gen-batches": cmd_gen_batches,
    "schedule": cmd_schedule,
    "query": cmd_query,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ParseError, DuplicateEdge, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GraphError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
