"""Observed solve/opt ratios on oracle-sized instances over a grid of eps and k.

    python3 scripts/envelope.py --count 40 --n-max 10
"""

import argparse

import numpy as np

from ktour.exact import exact_ktc
from ktour.generate import DISTRIBUTIONS, generate
from ktour.heuristics import cover_heuristic
from ktour.pipeline import solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.25, 0.5])
    ap.add_argument("--ks", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'eps':>5} {'k':>3} {'heur_max':>9} {'red_mean':>9} {'red_max':>8} {'solve_max':>9} {'red_wins':>8}")
    for eps in args.eps:
        for k in args.ks:
            heur, red, guarded, wins = [], [], [], 0
            for j in range(args.count):
                n = int(rng.integers(1, args.n_max + 1))
                inst = generate(n, k, seed=int(rng.integers(1 << 30)), dist=DISTRIBUTIONS[j % 3])
                opt = exact_ktc(inst).cost
                h = cover_heuristic(inst).cost
                r = solve(inst, eps, "exact", guard=False).cost
                heur.append(h / opt)
                red.append(r / opt)
                guarded.append(min(h, r) / opt)
                wins += r <= h
            print(f"{eps:>5} {k:>3} {max(heur):>9.4f} {np.mean(red):>9.4f} {max(red):>8.4f} "
                  f"{max(guarded):>9.4f} {wins:>5}/{args.count}")


if __name__ == "__main__":
    main()
