"""Ring decomposition of a snapped instance into independent segments.

Circles are grouped into rings of ``width`` consecutive circles. Every
``period``-th ring (those with index = residue mod period) is marked; points
in marked rings are covered separately by the heuristic, and each maximal run
of unmarked rings becomes an independent subproblem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import (
    LocationGrid,
    SnappedInstance,
    Subproblem,
    cap_locations,
    check_eps,
)
from .heuristics import cover_heuristic
from .model import InfeasibleError, Instance, InvariantError, Solution, make_solution, tours_cost


@dataclass(frozen=True)
class RingLayout:
    width: int
    ring_count: int
    circle_count: int

    def ring_of_circle(self, circle):
        return np.asarray(circle) // self.width

    def circles(self, ring: int) -> range:
        return range(ring * self.width, min((ring + 1) * self.width, self.circle_count))


def ring_width(k: int, eps: float) -> int:
    return math.ceil(math.log(6.0 / eps) / math.log(1.0 + eps / k))


def marking_period(eps: float) -> int:
    return math.ceil(24.0 / eps)


def build_rings(grid: LocationGrid, eps: float | None = None) -> RingLayout:
    eps = grid.epsilon if eps is None else check_eps(eps)
    w = ring_width(grid.k, eps)
    return RingLayout(w, -(-grid.circle_count // w), grid.circle_count)


@dataclass(frozen=True)
class RingPartition:
    layout: RingLayout
    period: int
    residue: int  # in 1..period

    def __post_init__(self):
        if not 1 <= self.residue <= self.period:
            raise ValueError("residue must lie in 1..period")

    @property
    def width(self) -> int:
        return self.layout.width

    @property
    def ring_count(self) -> int:
        return self.layout.ring_count

    def is_marked(self, ring):
        return np.asarray(ring) % self.period == self.residue % self.period

    @property
    def marked(self) -> frozenset[int]:
        return frozenset(j for j in range(self.ring_count) if self.is_marked(j))

    def ring_of_circle(self, circle):
        return self.layout.ring_of_circle(circle)

    def segment_of_ring(self) -> np.ndarray:
        """Run index of every ring; -1 for marked rings. Runs are numbered outward."""
        out = np.full(self.ring_count, -1, dtype=np.int64)
        run, prev_marked = -1, True
        for j in range(self.ring_count):
            if self.is_marked(j):
                prev_marked = True
                continue
            if prev_marked:
                run += 1
            out[j] = run
            prev_marked = False
        return out

    def run_count(self) -> int:
        seg = self.segment_of_ring()
        return int(seg.max()) + 1 if len(seg) else 0


def point_rings(snapped: SnappedInstance, layout: RingLayout, indices) -> np.ndarray:
    return layout.ring_of_circle(snapped.circle_of(indices))


@dataclass(frozen=True)
class MarkingChoice:
    partition: RingPartition
    cover: Solution  # tours over original indices; cost on snapped coordinates
    marked_points: np.ndarray
    costs: dict = field(default_factory=dict)  # residue -> cover cost, where evaluated


def _cover_subset(snapped: SnappedInstance, idx: np.ndarray) -> Solution:
    if len(idx) == 0:
        return Solution((), 0.0)
    sub = snapped.subproblem(idx)
    sol = cover_heuristic(sub.instance)
    tours = tuple(tuple(int(sub.index_map[p]) for p in t) for t in sol.tours)
    return Solution(tours, sol.cost)


def select_marking(snapped: SnappedInstance, layout: RingLayout, eps: float,
                   period: int | None = None, indices=None) -> MarkingChoice:
    """Pick the residue whose marked rings are cheapest to cover heuristically.

    Residues whose marked rings hold no points cost nothing; when one exists
    the lowest such residue wins without running the heuristic at all, since
    no cover can be cheaper. Ties go to the lowest residue.
    """
    check_eps(eps)
    a = marking_period(eps) if period is None else int(period)
    idx = snapped.kept if indices is None else np.asarray(indices, dtype=np.intp)
    rings = point_rings(snapped, layout, idx)
    residue_of = np.where(rings % a == 0, a, rings % a)
    occupied = set(np.unique(residue_of).tolist())
    empty = [b for b in range(1, a + 1) if b not in occupied]
    costs = {}
    if empty:
        b = empty[0]
        costs[b] = 0.0
        chosen = Solution((), 0.0)
    else:
        best = None
        for b in range(1, a + 1):
            sol = _cover_subset(snapped, idx[residue_of == b])
            costs[b] = sol.cost
            if best is None or sol.cost < best[1].cost:
                best = (b, sol)
        b, chosen = best
    marked_pts = idx[residue_of == b]
    return MarkingChoice(RingPartition(layout, a, b), chosen, marked_pts, costs)


@dataclass(frozen=True, eq=False)
class SegmentProblem:
    index: int
    rings: range
    sub: Subproblem
    trivial: tuple[tuple[int, ...], ...]  # capped-away k-tours, original indices
    location_count: int

    @property
    def instance(self) -> Instance:
        return self.sub.instance

    @property
    def index_map(self) -> np.ndarray:
        return self.sub.index_map


def extract_segments(snapped: SnappedInstance, partition: RingPartition, indices=None,
                     cap: bool = True) -> list[SegmentProblem]:
    """One subproblem per maximal run of unmarked rings that holds points.

    With ``cap`` each segment's locations are re-capped at T_seg * k points,
    where T_seg counts only the locations inside the segment's rings.
    """
    idx = snapped.kept if indices is None else np.asarray(indices, dtype=np.intp)
    layout = partition.layout
    rings = point_rings(snapped, layout, idx)
    seg_of_ring = partition.segment_of_ring()
    seg = seg_of_ring[rings] if len(idx) else np.zeros(0, dtype=np.int64)
    out = []
    k = snapped.original.k
    s = snapped.grid.ray_count
    for run in range(int(seg_of_ring.max()) + 1 if len(seg_of_ring) else 0):
        members = np.sort(idx[seg == run])
        if len(members) == 0:
            continue
        run_rings = np.flatnonzero(seg_of_ring == run)
        rr = range(int(run_rings[0]), int(run_rings[-1]) + 1)
        n_circles = sum(len(layout.circles(j)) for j in rr)
        T_seg = n_circles * s
        trivial = ()
        if cap:
            capped = cap_locations(snapped, T_seg, k, members)
            members, trivial = capped.retained, capped.trivial
        out.append(SegmentProblem(len(out), rr, snapped.subproblem(members), trivial, T_seg))
    return out


# -- separation transform --------------------------------------------------

def segment_circle_crossing(a, b, radius: float):
    """Point where segment a->b (depot at 0) leaves the circle, or None.

    ``a`` must lie inside the circle. Tangential contact is not a crossing.
    """
    a = np.asarray(a, float)
    d = np.asarray(b, float) - a
    A = d @ d
    B = 2 * (a @ d)
    C = a @ a - radius * radius
    disc = B * B - 4 * A * C
    if A == 0 or disc <= 0:
        return None
    t = (-B + math.sqrt(disc)) / (2 * A)
    if not 0 < t < 1:
        return None
    return a + t * d


def separated(partition: RingPartition, rings_a, rings_b) -> np.ndarray:
    """True where a marked ring lies strictly between the two ring indices."""
    seg = partition.segment_of_ring()
    ra, rb = np.asarray(rings_a), np.asarray(rings_b)
    lo, hi = np.minimum(ra, rb), np.maximum(ra, rb)
    return (seg[lo] != seg[hi]) | (seg[lo] < 0) | (seg[hi] < 0)


def respects_rings(snapped, solution: Solution, partition: RingPartition) -> bool:
    """No tour touches a marked ring or joins points separated by one."""
    seg = partition.segment_of_ring()
    for t in solution.tours:
        if not t:
            continue
        s = seg[point_rings(snapped, partition.layout, list(t))]
        if s.min() < 0 or s.max() != s.min():
            return False
    return True


@dataclass(frozen=True)
class TransformResult:
    solution: Solution
    shortcut_cost: float  # input with marked-ring points skipped
    charged_length: float  # total length of ring-crossing fragments paying for splits
    added_cost: float  # output cost minus shortcut cost


def ring_respecting_transform(snapped: SnappedInstance, solution: Solution,
                              partition: RingPartition, eps: float) -> TransformResult:
    """Split tours so none crosses a marked ring, dropping marked-ring points.

    Each tour is first shortcut past its marked-ring points. Every remaining
    edge between different segments is cut at the inner circle of the
    innermost marked ring it crosses; the points of each segment visited by the
    tour are then chained in their original order and closed through the
    depot. The extra length paid for each cut is charged to the part of the
    cut edge beyond that circle, which is long because rings are wide.
    """
    eps = check_eps(eps)
    inst = snapped.instance
    if any(snapped.location[p] < 0 for t in solution.tours for p in t):
        raise ValueError("transform applies to snapped points only")
    seg_of_ring = partition.segment_of_ring()
    layout = partition.layout
    radii = snapped.grid.radii
    o = np.asarray(inst.origin)

    shortcut_tours = []
    out_tours = []
    charged = 0.0
    for tour in solution.tours:
        t = list(tour)
        if not t:
            continue
        rings = point_rings(snapped, layout, t)
        keep = seg_of_ring[rings] >= 0
        t = [p for p, kp in zip(t, keep) if kp]
        rings = rings[keep]
        if not t:
            continue
        shortcut_tours.append(tuple(t))
        segs = seg_of_ring[rings]
        for a, b, ra, rb in zip(t, t[1:], rings, rings[1:]):
            if seg_of_ring[ra] == seg_of_ring[rb]:
                continue
            if ra > rb:
                a, b, ra, rb = b, a, rb, ra
            first_marked = next(j for j in range(ra + 1, rb) if seg_of_ring[j] < 0)
            c = radii[layout.circles(first_marked)[0]]
            x = segment_circle_crossing(inst.points[a] - o, inst.points[b] - o, c)
            if x is None:
                raise InvariantError("cut edge does not cross its marked ring")
            charged += float(np.hypot(*(inst.points[b] - o - x)))
        for s_id in sorted(set(segs.tolist())):
            out_tours.append(tuple(p for p, sp in zip(t, segs) if sp == s_id))

    shortcut_cost = tours_cost(inst, shortcut_tours)
    out = make_solution(inst, out_tours, **solution.meta)
    return TransformResult(out, shortcut_cost, charged, out.cost - shortcut_cost)


def merge(instance: Instance, *parts) -> Solution:
    """Concatenate tour lists (original indices) into one validated solution."""
    tours = [tuple(int(p) for p in t) for part in parts for t in (part.tours if isinstance(part, Solution) else part)]
    tours = [t for t in tours if t]
    seen = np.zeros(instance.n, dtype=np.int64)
    for t in tours:
        for p in t:
            if not 0 <= p < instance.n:
                raise InfeasibleError(f"merged tour references invalid index {p}")
            seen[p] += 1
    if np.any(seen > 1):
        raise InfeasibleError(f"point {int(np.flatnonzero(seen > 1)[0])} covered by more than one part")
    if np.any(seen == 0):
        raise InfeasibleError(f"point {int(np.flatnonzero(seen == 0)[0])} not covered by any part")
    big = [t for t in tours if len(t) > instance.k]
    if big:
        raise InfeasibleError(f"merged tour of {len(big[0])} points exceeds capacity {instance.k}")
    return make_solution(instance, tours)
