"""Wall time of reduce and cover_heuristic as n grows (best of --reps runs).

    python3 scripts/scaling.py --sizes 1e4 1e5 2e5 --k 50 --eps 0.5
"""

import argparse
import time

from ktour.generate import generate
from ktour.heuristics import cover_heuristic
from ktour.pipeline import reduce


def best_of(fn, reps):
    best, out = float("inf"), None
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=float, nargs="+", default=[1e4, 1e5, 2e5, 1e6])
    ap.add_argument("--k", type=int, default=50)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--dist", default="uniform-disk")
    ap.add_argument("--skip-heuristic", action="store_true")
    args = ap.parse_args()

    print(f"{'n':>9} {'reduce_s':>9} {'T':>9} {'q':>3} {'seg_pts':>9} {'heur_s':>8} {'heur_cost':>12}")
    prev = None
    for n in map(int, args.sizes):
        inst = generate(n, args.k, seed=n, dist=args.dist)
        tr, red = best_of(lambda: reduce(inst, args.eps), args.reps)
        th, cost = float("nan"), float("nan")
        if not args.skip_heuristic:
            th, sol = best_of(lambda: cover_heuristic(inst), 1)
            cost = sol.cost
        growth = f"  x{tr / prev[1]:.2f} for x{n / prev[0]:.1f} n" if prev else ""
        print(f"{n:>9} {tr:>9.3f} {red.log['T']:>9} {red.log['q']:>3} {red.segment_points():>9} "
              f"{th:>8.2f} {cost:>12.3f}{growth}")
        prev = (n, tr)


if __name__ == "__main__":
    main()
