"""Benchmark suites: cost, lower bound, ratio and wall time per row.

A suite is JSON::

    {"rows": [{"n": 8, "k": 3, "eps": 0.5, "seeds": [0, 1],
               "strategies": ["exact", "heuristic", "reduce-heuristic"],
               "dist": "uniform-disk"}]}

Each (row, seed, strategy) combination becomes one result row. Rows with
n <= ORACLE_MAX use the exact optimum as the lower bound.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from .exact import exact_ktc
from .generate import generate
from .heuristics import bounds
from .pipeline import solve, solve_direct

ORACLE_MAX = 9
STRATEGIES = ("exact", "heuristic", "reduce-exact", "reduce-heuristic")


@dataclass
class BenchRow:
    n: int
    k: int
    eps: float
    seed: int
    dist: str
    strategy: str
    cost: float | None = None
    lower_bound: float | None = None
    lb_kind: str | None = None
    ratio: float | None = None
    time_s: float | None = None
    error: str | None = None


def expand(suite: dict) -> list[BenchRow]:
    rows = []
    for entry in suite["rows"]:
        seeds = entry.get("seeds", [entry.get("seed", 0)])
        strategies = entry.get("strategies", [entry.get("strategy", "heuristic")])
        for seed in seeds:
            for strat in strategies:
                rows.append(BenchRow(int(entry["n"]), int(entry["k"]), float(entry.get("eps", 0.5)),
                                     int(seed), entry.get("dist", "uniform-disk"), strat))
    return rows


def _run_strategy(row: BenchRow, instance, opt):
    if row.strategy == "exact" and opt is not None:
        return opt
    if row.strategy in ("exact", "heuristic"):
        return solve_direct(instance, row.strategy)
    if row.strategy in ("reduce-exact", "reduce-heuristic"):
        return solve(instance, row.eps, row.strategy.split("-", 1)[1])
    raise ValueError(f"unknown strategy {row.strategy!r}")


def run_row(row: BenchRow) -> BenchRow:
    try:
        inst = generate(row.n, row.k, row.seed, row.dist)
        opt = exact_ktc(inst) if row.n <= ORACLE_MAX else None
        t0 = time.perf_counter()
        sol = _run_strategy(row, inst, opt)
        row.time_s = time.perf_counter() - t0
        row.cost = sol.cost
        if opt is not None:
            row.lower_bound, row.lb_kind = opt.cost, "exact"
        else:
            row.lower_bound, row.lb_kind = bounds(inst).opt_lower, "mst/radial"
        row.ratio = 1.0 if row.cost == row.lower_bound else row.cost / row.lower_bound
    except Exception as exc:  # a failing row is recorded; the suite goes on
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_suite(suite: dict, threads: int = 1) -> list[BenchRow]:
    rows = expand(suite)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run_row, rows))
    return [run_row(r) for r in rows]


def to_jsonl(rows: list[BenchRow]) -> str:
    return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in rows)


def to_table(rows: list[BenchRow]) -> str:
    head = f"{'n':>7} {'k':>4} {'eps':>5} {'seed':>5} {'dist':<13} {'strategy':<17} {'cost':>12} {'lower':>12} {'ratio':>7} {'time_s':>8}"
    out = [head, "-" * len(head)]
    for r in rows:
        if r.error:
            out.append(f"{r.n:>7} {r.k:>4} {r.eps:>5} {r.seed:>5} {r.dist:<13} {r.strategy:<17} ERROR {r.error}")
        else:
            out.append(f"{r.n:>7} {r.k:>4} {r.eps:>5} {r.seed:>5} {r.dist:<13} {r.strategy:<17} "
                       f"{r.cost:>12.6f} {r.lower_bound:>12.6f} {r.ratio:>7.4f} {r.time_s:>8.3f}")
    return "\n".join(out)
