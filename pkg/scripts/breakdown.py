"""Per-engine timing breakdown on a synthetic evolving graph.

Writes ``<out>/<algo>/timing.csv`` for each algorithm and prints totals, plus
the baseline's deletion vs. addition work per transition.
"""
import argparse
import csv
from collections import defaultdict
from pathlib import Path

from evograph.harness import ExperimentConfig, run_query
from evograph.synthetic import random_store


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vertices", type=int, default=10_000)
    ap.add_argument("--edges", type=int, default=50_000)
    ap.add_argument("--snapshots", type=int, default=11)
    ap.add_argument("--batch-size", type=int, default=500)
    ap.add_argument("--add-fraction", type=float, default=0.5)
    ap.add_argument("--algo", default="sssp")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("breakdown-out"))
    args = ap.parse_args()

    store = random_store(args.vertices, args.edges, args.snapshots - 1, args.batch_size,
                         args.add_fraction, seed=args.seed)
    cfg = ExperimentConfig(store=args.out / "store", algorithm=args.algo, engine="all", seed=args.seed)
    runs = run_query(cfg, args.out, store=store)

    for algo in cfg.algorithms():
        totals = defaultdict(lambda: defaultdict(float))
        with (args.out / algo / "timing.csv").open() as fh:
            for row in csv.DictReader(fh):
                for col in ("mutation_ms", "incr_add_ms", "incr_del_ms", "initial_ms", "edge_fn_applications"):
                    totals[row["engine"]][col] += float(row[col])
        print(f"\n{algo}")
        print(f"{'engine':<14}{'initial':>10}{'add':>10}{'del':>10}{'mutate':>10}{'edge fns':>12}")
        for engine, t in totals.items():
            print(f"{engine:<14}{t['initial_ms']:>10.1f}{t['incr_add_ms']:>10.1f}{t['incr_del_ms']:>10.1f}"
                  f"{t['mutation_ms']:>10.1f}{int(t['edge_fn_applications']):>12}")
        base = runs[(algo, "baseline")]
        print("baseline edge-function work per transition (deletions / additions):")
        for t, rep in base.step_reports.items():
            print(f"  -> {t:>3}: {rep.del_stats.edge_fn:>8} / {rep.add_stats.edge_fn:<8} tainted {rep.del_stats.tainted}")


if __name__ == "__main__":
    main()
