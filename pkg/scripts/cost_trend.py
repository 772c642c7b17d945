"""Schedule cost as the window grows while the total number of changes stays fixed.

    python scripts/cost_trend.py --total 4500 --windows 3 6 10 16
"""
import argparse

from evograph.synthetic import random_store
from evograph.trigrid import direct_hop_schedule, work_sharing_schedule


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vertices", type=int, default=2000)
    ap.add_argument("--edges", type=int, default=8000)
    ap.add_argument("--total", type=int, default=4500, help="changes spread over the window")
    ap.add_argument("--windows", type=int, nargs="+", default=[3, 6, 10, 16])
    ap.add_argument("--add-fraction", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'m':>4} {'batch':>6} {'work-sharing':>13} {'direct-hop':>11} {'ratio':>6}")
    for m in args.windows:
        batch = args.total // max(m - 1, 1)
        store = random_store(args.vertices, args.edges, m - 1, batch, args.add_fraction, seed=args.seed)
        window = store.full_window()
        ws = work_sharing_schedule(store, window).total_cost
        dh = direct_hop_schedule(store, window).total_cost
        ratio = dh / ws if ws else float("nan")
        print(f"{m:>4} {batch:>6} {ws:>13} {dh:>11} {ratio:>6.2f}")


if __name__ == "__main__":
    main()
