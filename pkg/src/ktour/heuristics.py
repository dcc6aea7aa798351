"""MST-based TSP tour, iterated tour partitioning, and their combination.

``cover_heuristic`` is the classical (3 - 2/k)-approximation: a doubled-MST
tour through the depot cut into capacity-k pieces at the best of the k cyclic
offsets.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial import Delaunay, QhullError

from .model import Bounds, Instance, InvariantError, Solution, radial_cost, tours_cost

# Prim's O(n^2) is faster than Delaunay + sparse MST below this many vertices.
PRIM_MAX = 600


@dataclass(frozen=True)
class TspTour:
    order: np.ndarray  # permutation of point indices, depot implicit at both ends
    length: float


@dataclass
class GuaranteeLog:
    """Counts of runtime checks of the partitioning length guarantee."""

    checks: int = 0
    violations: int = 0
    worst_slack: float = np.inf
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record(self, cost: float, bound: float, slack: float) -> bool:
        with self.lock:
            self.checks += 1
            self.worst_slack = min(self.worst_slack, bound - cost)
            ok = cost <= bound + slack
            if not ok:
                self.violations += 1
            return ok


itp_log = GuaranteeLog()


def closed_length(instance: Instance, order) -> float:
    order = np.asarray(order, dtype=np.intp)
    if order.size == 0:
        return 0.0
    return tours_cost(instance, [order])


def _prim_edges(xy: np.ndarray) -> list[tuple[int, int]]:
    m = len(xy)
    in_tree = np.zeros(m, dtype=bool)
    best = np.full(m, np.inf)
    parent = np.full(m, -1)
    best[0] = 0.0
    edges = []
    for _ in range(m):
        cand = np.where(in_tree, np.inf, best)
        u = int(np.argmin(cand))
        in_tree[u] = True
        if parent[u] >= 0:
            edges.append((int(parent[u]), u))
        d = np.hypot(*(xy - xy[u]).T)
        upd = (~in_tree) & (d < best)
        best[upd] = d[upd]
        parent[upd] = u
    return edges


def _collinear_edges(xy: np.ndarray) -> list[tuple[int, int]] | None:
    centered = xy - xy.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    if len(sv) > 1 and sv[1] > 1e-12 * max(sv[0], 1.0):
        return None
    t = centered @ vt[0]
    order = np.argsort(t, kind="stable")
    return [(int(a), int(b)) for a, b in zip(order[:-1], order[1:])]


def euclidean_mst_edges(xy: np.ndarray) -> list[tuple[int, int]]:
    """Edges of a Euclidean minimum spanning tree of distinct points ``xy``."""
    m = len(xy)
    if m <= 1:
        return []
    if m <= PRIM_MAX:
        return _prim_edges(xy)
    line = _collinear_edges(xy)
    if line is not None:
        return line
    try:
        tri = Delaunay(xy)
    except QhullError:
        return _prim_edges(xy)
    s = tri.simplices
    pairs = np.vstack([s[:, [0, 1]], s[:, [1, 2]], s[:, [0, 2]]])
    pairs.sort(axis=1)
    pairs = np.unique(pairs, axis=0)
    w = np.hypot(*(xy[pairs[:, 0]] - xy[pairs[:, 1]]).T)
    g = coo_matrix((w, (pairs[:, 0], pairs[:, 1])), shape=(m, m)).tocsr()
    t = minimum_spanning_tree(g).tocoo()
    edges = list(zip(t.row.tolist(), t.col.tolist()))
    if len(edges) != m - 1:
        # zero-weight or disconnected candidates; fall back to the exact quadratic method
        return _prim_edges(xy)
    return edges


def mst_tsp_tour(instance: Instance) -> TspTour:
    """Preorder walk of the Euclidean MST rooted at the depot, with shortcutting.

    Children are visited in order of the angle of the tree edge leading to
    them (ties by vertex index). Points sharing coordinates are collapsed to
    one tree vertex and emitted consecutively in index order.
    """
    n = instance.n
    if n == 0:
        return TspTour(np.zeros(0, dtype=np.intp), 0.0)
    allxy = np.vstack([np.asarray(instance.origin)[None, :], instance.points])
    uniq, inverse = np.unique(allxy, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    root = int(inverse[0])
    edges = euclidean_mst_edges(uniq)
    m = len(uniq)

    if edges:
        e = np.asarray(edges, dtype=np.intp)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        delta = uniq[dst] - uniq[src]
        ang = np.mod(np.arctan2(delta[:, 1], delta[:, 0]), 2 * np.pi)
        # sort adjacency by (source, angle, target)
        srt = np.lexsort((dst, ang, src))
        src, dst = src[srt], dst[srt]
        start = np.searchsorted(src, np.arange(m + 1))
    else:
        dst = np.zeros(0, dtype=np.intp)
        start = np.zeros(m + 1, dtype=np.intp)

    # members of each unique vertex, excluding the depot itself (allxy row 0)
    member_order = np.argsort(inverse[1:], kind="stable")
    member_keys = inverse[1:][member_order]
    mstart = np.searchsorted(member_keys, np.arange(m + 1))

    visited = np.zeros(m, dtype=bool)
    out = []
    stack = [root]
    visited[root] = True
    dst_l = dst.tolist()
    start_l = start.tolist()
    while stack:
        u = stack.pop()
        out.append(member_order[mstart[u]:mstart[u + 1]])
        # push in reverse so the smallest angle pops first
        for j in range(start_l[u + 1] - 1, start_l[u] - 1, -1):
            v = dst_l[j]
            if not visited[v]:
                visited[v] = True
                stack.append(v)
    order = np.concatenate(out).astype(np.intp)
    return TspTour(order, closed_length(instance, order))


def _offset_costs(instance: Instance, order: np.ndarray, length: float) -> np.ndarray:
    """Cost of the partition for every offset 0..k-1, without building tours.

    Cutting the walk after position i (1-based) replaces edge (p_i, p_{i+1})
    by the two depot legs; offset o cuts after every i with i = o (mod k).
    """
    k, n = instance.k, len(order)
    pts = instance.points[order]
    r = np.hypot(*(pts - np.asarray(instance.origin)).T)
    costs = np.full(k, length)
    if n > 1:
        d = np.hypot(*np.diff(pts, axis=0).T)
        delta = r[:-1] + r[1:] - d
        pos = np.arange(1, n) % k
        costs += np.bincount(pos, weights=delta, minlength=k)
    return costs


def partition_at_offset(order, k: int, offset: int) -> list[tuple[int, ...]]:
    order = [int(i) for i in order]
    tours = []
    if offset:
        tours.append(tuple(order[:offset]))
    for s in range(offset, len(order), k):
        tours.append(tuple(order[s:s + k]))
    return [t for t in tours if t]


def itp(instance: Instance, tsp_tour: TspTour) -> Solution:
    """Iterated tour partitioning: best of the k cyclic cuts of ``tsp_tour``.

    Raises InvariantError if the result exceeds (1 - 1/k)|U| + rad(P).
    """
    k, n = instance.k, instance.n
    order = np.asarray(tsp_tour.order, dtype=np.intp)
    if n == 0:
        return Solution((), 0.0, {"offset": 0})
    if len(order) != n or not np.array_equal(np.sort(order), np.arange(n)):
        raise ValueError("tsp_tour must visit every point exactly once")
    offsets = min(k, n)
    costs = _offset_costs(instance, order, tsp_tour.length)[:offsets]
    best = int(np.argmin(costs))  # argmin returns the lowest offset on ties
    tours = partition_at_offset(order, k, best)
    cost = tours_cost(instance, tours)

    bound = (1.0 - 1.0 / k) * tsp_tour.length + radial_cost(instance)
    slack = 1e-9 * max(1.0, bound)
    if not itp_log.record(cost, bound, slack):
        raise InvariantError(f"partitioning cost {cost!r} exceeds guarantee {bound!r}")
    return Solution(tuple(tours), cost, {"offset": best})


def cover_heuristic(instance: Instance) -> Solution:
    """(3 - 2/k)-approximate k-tour cover in O(n log n)."""
    return itp(instance, mst_tsp_tour(instance))


def mst_weight(instance: Instance) -> float:
    """Weight of the Euclidean MST on the points plus the depot."""
    allxy = np.vstack([np.asarray(instance.origin)[None, :], instance.points])
    uniq = np.unique(allxy, axis=0)
    e = np.asarray(euclidean_mst_edges(uniq), dtype=np.intp).reshape(-1, 2)
    return float(np.hypot(*(uniq[e[:, 0]] - uniq[e[:, 1]]).T).sum())


def bounds(instance: Instance) -> Bounds:
    """Cheap lower and upper bounds on the optimum.

    Any cover's tours form a connected graph on the points and the depot, so
    the optimum is at least the MST weight; it is also at least twice the
    largest depot distance and at least the radial cost.
    """
    if instance.n == 0:
        return Bounds(0.0, 0.0, 0.0, 0.0)
    rad = radial_cost(instance)
    tour = mst_tsp_tour(instance)
    lower = max(rad, mst_weight(instance), 2.0 * float(instance.radii().max()))
    upper = itp(instance, tour).cost
    return Bounds(rad, tour.length, lower, upper)
