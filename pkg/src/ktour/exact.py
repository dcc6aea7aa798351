"""Exact solvers for desk-sized instances.

``exact_ktc`` runs a subset dynamic program on top of one Held-Karp table
shared by all groups; ``naive_ktc`` enumerates set partitions and tour orders
and exists only to cross-check it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .heuristics import TspTour, closed_length
from .model import CapabilityError, Instance, Solution, make_solution


@dataclass(frozen=True)
class OracleLimits:
    max_points_dp: int = 14
    max_points_naive: int = 8

    def __post_init__(self):
        if self.max_points_naive > self.max_points_dp:
            raise ValueError("max_points_naive must not exceed max_points_dp")


DEFAULT_LIMITS = OracleLimits()


def _refuse(n: int, limit: int, what: str):
    if n > limit:
        raise CapabilityError(f"{what} refuses {n} points (limit {limit}); use the heuristic solver")


def _distances(instance: Instance):
    pts = instance.points
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    r = instance.radii()
    return d, r


def _path_table(d: np.ndarray, r: np.ndarray, max_size: int) -> np.ndarray:
    """f[mask, j]: shortest depot -> ... -> j path visiting exactly ``mask``.

    Filled only for masks with at most ``max_size`` bits; other rows stay inf.
    """
    n = len(r)
    size = 1 << n
    f = np.full((size, n), np.inf)
    masks = np.arange(size)
    pop = np.zeros(size, dtype=np.int64)
    for j in range(n):
        pop += (masks >> j) & 1
    for j in range(n):
        f[1 << j, j] = r[j]
    for c in range(2, max_size + 1):
        level = masks[pop == c]
        for j in range(n):
            sel = level[(level >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            f[sel, j] = (f[prev] + d[:, j]).min(axis=1)
    return f


def _group_lengths(f: np.ndarray, r: np.ndarray) -> np.ndarray:
    return (f + r).min(axis=1)


def _backtrack(f: np.ndarray, d: np.ndarray, r: np.ndarray, mask: int) -> list[int]:
    """Recover a visiting order for ``mask`` from the path table."""
    j = int(np.argmin(f[mask] + r))
    order = [j]
    while mask != (1 << j):
        prev = mask ^ (1 << j)
        i = int(np.argmin(f[prev] + d[:, j]))
        order.append(i)
        mask, j = prev, i
    order.reverse()
    return order


def held_karp_tsp(instance: Instance, limits: OracleLimits = DEFAULT_LIMITS) -> TspTour:
    """Minimum-length closed tour through the depot and every point."""
    n = instance.n
    _refuse(n, limits.max_points_dp, "held_karp_tsp")
    if n == 0:
        return TspTour(np.zeros(0, dtype=np.intp), 0.0)
    d, r = _distances(instance)
    f = _path_table(d, r, n)
    order = np.asarray(_backtrack(f, d, r, (1 << n) - 1), dtype=np.intp)
    return TspTour(order, closed_length(instance, order))


def exact_ktc(instance: Instance, limits: OracleLimits = DEFAULT_LIMITS) -> Solution:
    """Optimal k-tour cover by dynamic programming over subsets.

    best[S] = min over groups G containing the lowest point of S, |G| <= k,
    of tour(G) + best[S \\ G].
    """
    n, k = instance.n, instance.k
    _refuse(n, limits.max_points_dp, "exact_ktc")
    if n == 0:
        return Solution((), 0.0, {"solver": "exact"})
    d, r = _distances(instance)
    kk = min(k, n)
    f = _path_table(d, r, kk)
    group = _group_lengths(f, r).tolist()

    full = (1 << n) - 1
    pc = [0] * (full + 1)
    for s in range(1, full + 1):
        pc[s] = pc[s >> 1] + (s & 1)
    best = [0.0] * (full + 1)
    choice = [0] * (full + 1)
    for s in range(1, full + 1):
        low = s & -s
        rest = s ^ low
        b = math.inf
        arg = 0
        sub = rest
        while True:
            g = sub | low
            if pc[g] <= kk:
                v = group[g] + best[s ^ g]
                if v < b:
                    b, arg = v, g
            if sub == 0:
                break
            sub = (sub - 1) & rest
        best[s] = b
        choice[s] = arg

    tours = []
    s = full
    while s:
        g = choice[s]
        members = _backtrack(f, d, r, g)
        tours.append(members)
        s ^= g
    return make_solution(instance, tours, solver="exact")


def naive_ktc(instance: Instance, limits: OracleLimits = DEFAULT_LIMITS) -> float:
    """Optimal cost by brute force over set partitions and block orders."""
    n, k = instance.n, instance.k
    _refuse(n, limits.max_points_naive, "naive_ktc")
    pts = [tuple(p) for p in instance.points.tolist()]
    o = tuple(instance.origin)

    def dist(a, b):
        return math.hypot(a[0] - b[0], a[1] - b[1])

    @lru_cache(maxsize=None)
    def block_cost(block: frozenset) -> float:
        best = math.inf
        for perm in itertools.permutations(sorted(block)):
            walk = [o] + [pts[i] for i in perm] + [o]
            best = min(best, sum(dist(a, b) for a, b in zip(walk, walk[1:])))
        return best

    def partitions(items):
        if not items:
            yield []
            return
        head, tail = items[0], items[1:]
        for size in range(0, min(k - 1, len(tail)) + 1):
            for mates in itertools.combinations(tail, size):
                remaining = [x for x in tail if x not in mates]
                for rest in partitions(remaining):
                    yield [frozenset((head,) + mates)] + rest

    best = math.inf
    for part in partitions(list(range(n))):
        best = min(best, sum(block_cost(b) for b in part))
    return 0.0 if n == 0 else best
