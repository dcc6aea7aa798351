"""Geometric instance reduction: close-point stripping, location grid,
snapping, location-cycle elimination, multiplicity capping and lifting.

Locations are intersections of circles of radius ``inner * growth**i`` with
``s`` equally spaced rays. A location is encoded as ``circle * s + ray``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import (
    InfeasibleError,
    Instance,
    InvariantError,
    Solution,
    make_solution,
    tours_cost,
    validate,
)

TWO_PI = 2.0 * math.pi


def check_eps(eps: float) -> float:
    eps = float(eps)
    if not (0.0 < eps <= 0.5):
        raise ValueError(f"epsilon must lie in (0, 1/2], got {eps}")
    return eps


class Location(NamedTuple):
    circle: int
    ray: int


@dataclass(frozen=True)
class StripResult:
    instance: Instance  # the kept points, re-indexed 0..m-1
    kept: np.ndarray  # original index of each kept point
    stripped: tuple[tuple[int, float], ...]  # (original index, 1-tour cost)
    threshold: float
    L: float

    @property
    def stripped_cost(self) -> float:
        return float(sum(c for _, c in self.stripped))

    @property
    def cost_bound(self) -> float:
        """n * 2 * threshold = 2 * L * eps, itself at most eps * opt."""
        return 2.0 * self.threshold * (len(self.kept) + len(self.stripped))


def strip_close_points(instance: Instance, eps: float) -> StripResult:
    """Cover every point with r(p) <= L*eps/n by its own out-and-back tour."""
    eps = check_eps(eps)
    n = instance.n
    r = instance.radii()
    L = float(r.max()) if n else 0.0
    threshold = L * eps / n if n else 0.0
    close = r <= threshold
    kept = np.flatnonzero(~close)
    stripped = tuple((int(i), 2.0 * float(r[i])) for i in np.flatnonzero(close))
    return StripResult(instance.subset(kept), kept, stripped, threshold, L)


@dataclass(frozen=True)
class LocationGrid:
    inner_radius: float
    growth: float
    circle_count: int
    ray_count: int
    L: float
    epsilon: float
    k: int
    n: int

    @property
    def T(self) -> int:
        return self.circle_count * self.ray_count

    @property
    def radii(self) -> np.ndarray:
        return self.inner_radius * self.growth ** np.arange(self.circle_count)

    @property
    def ray_step(self) -> float:
        return TWO_PI / self.ray_count

    def location(self, loc_id: int) -> Location:
        return Location(*divmod(int(loc_id), self.ray_count))

    def loc_id(self, circle: int, ray: int) -> int:
        return circle * self.ray_count + ray

    def location_xy(self, loc_ids, origin=(0.0, 0.0)) -> np.ndarray:
        loc_ids = np.asarray(loc_ids, dtype=np.int64)
        circle, ray = np.divmod(loc_ids, self.ray_count)
        rad = self.inner_radius * self.growth ** circle
        ang = ray * self.ray_step
        return np.column_stack([origin[0] + rad * np.cos(ang), origin[1] + rad * np.sin(ang)])


def build_grid(L: float, n: int, k: int, eps: float) -> LocationGrid:
    eps = check_eps(eps)
    if not L > 0:
        raise ValueError("L must be positive; strip an all-depot instance first")
    if n < 1 or k < 1:
        raise ValueError("n and k must be at least 1")
    inner = L * eps / n
    growth = 1.0 + eps / k
    circles = math.ceil(math.log(n / eps) / math.log(growth)) + 1
    while inner * growth ** (circles - 1) < L * (1 - 1e-12):
        circles += 1
    rays = math.ceil(TWO_PI * k / eps)
    return LocationGrid(inner, growth, circles, rays, float(L), eps, int(k), int(n))


@dataclass(frozen=True, eq=False)
class Subproblem:
    """A re-indexed slice of a snapped instance, with the map back to original ids."""

    instance: Instance  # snapped coordinates, local indices
    index_map: np.ndarray  # local -> original index
    location: np.ndarray  # local -> location id


@dataclass(frozen=True, eq=False)
class SnappedInstance:
    grid: LocationGrid
    original: Instance
    instance: Instance  # same indices as ``original``; kept points moved to their locations
    location: np.ndarray  # per original index; -1 for stripped points
    stripped: tuple[tuple[int, float], ...]

    @property
    def kept(self) -> np.ndarray:
        return np.flatnonzero(self.location >= 0)

    @property
    def displacement(self) -> np.ndarray:
        return np.hypot(*(self.instance.points - self.original.points).T)

    def counts(self) -> dict[Location, int]:
        ids, c = np.unique(self.location[self.location >= 0], return_counts=True)
        return {self.grid.location(i): int(m) for i, m in zip(ids, c)}

    def assignment(self) -> dict[int, Location]:
        return {int(i): self.grid.location(self.location[i]) for i in self.kept}

    def circle_of(self, indices) -> np.ndarray:
        return self.location[np.asarray(indices, dtype=np.intp)] // self.grid.ray_count

    def subproblem(self, indices) -> Subproblem:
        idx = np.asarray(indices, dtype=np.intp)
        return Subproblem(self.instance.subset(idx), idx, self.location[idx])


def snap(instance: Instance, grid: LocationGrid, stripped=()) -> SnappedInstance:
    """Move each point (other than ``stripped``) to its nearest location.

    The nearest location is taken among the four bracketing candidates;
    near-ties go to the lower circle, then the lower ray index.
    """
    if isinstance(stripped, StripResult):
        stripped = stripped.stripped
    stripped = tuple(stripped)
    n = instance.n
    s = grid.ray_count
    cc = grid.circle_count
    mask = np.ones(n, dtype=bool)
    if stripped:
        mask[[i for i, _ in stripped]] = False
    idx = np.flatnonzero(mask)

    o = np.asarray(instance.origin)
    rel = instance.points[idx] - o
    r = np.hypot(rel[:, 0], rel[:, 1])
    lo = grid.inner_radius * (1 - 1e-12)
    hi = grid.inner_radius * grid.growth ** (cc - 1) * (1 + 1e-12)
    bad = (r < lo) | (r > hi)
    if bad.any():
        j = int(idx[np.argmax(bad)])
        raise ValueError(f"point {j} lies outside the grid annulus; run strip_close_points first")

    theta = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), TWO_PI)
    theta[theta >= TWO_PI] = 0.0
    step = grid.ray_step
    ci = np.floor(np.log(r / grid.inner_radius) / math.log(grid.growth)).astype(np.int64)
    ci = np.clip(ci, 0, cc - 2)
    rj = np.clip(np.floor(theta / step).astype(np.int64), 0, s - 1)

    circles = np.stack([ci, ci, ci + 1, ci + 1], axis=1)
    rays_raw = np.stack([rj, rj + 1, rj, rj + 1], axis=1)
    dtheta = np.abs(theta[:, None] - rays_raw * step)
    rays = rays_raw % s
    crad = grid.inner_radius * grid.growth ** circles
    # distances in units of r(p), so tiny coordinates do not underflow
    rho = crad / r[:, None]
    d2 = (1.0 - rho) ** 2 + 4.0 * rho * np.sin(dtheta / 2) ** 2
    dist = np.sqrt(np.maximum(d2, 0.0))
    near = dist <= dist.min(axis=1, keepdims=True) + 1e-12
    key = np.where(near, circles * s + rays, np.iinfo(np.int64).max)
    pick = np.argmin(key, axis=1)
    loc = key[np.arange(len(idx)), pick]

    location = np.full(n, -1, dtype=np.int64)
    location[idx] = loc
    pts = np.array(instance.points, copy=True)
    if len(idx):
        pts[idx] = grid.location_xy(loc, instance.origin)
    return SnappedInstance(grid, instance, instance.with_points(pts), location, stripped)


def discretize(instance: Instance, eps: float) -> SnappedInstance:
    """Strip close points, build the grid from the original n, and snap the rest."""
    st = strip_close_points(instance, eps)
    if len(st.kept) == 0:
        grid = build_grid(1.0, max(instance.n, 1), instance.k, eps)
        return SnappedInstance(grid, instance, instance, np.full(instance.n, -1, dtype=np.int64), st.stripped)
    grid = build_grid(st.L, instance.n, instance.k, eps)
    return snap(instance, grid, st)


# -- location cycles -------------------------------------------------------

def _visits(location: np.ndarray, tour) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {}
    for p in tour:
        out.setdefault(int(location[p]), []).append(p)
    return out


def _incidence(location, tours):
    """Tour -> set of visited locations, for nontrivial tours only."""
    inc = {}
    for t, tour in enumerate(tours):
        locs = {int(location[p]) for p in tour}
        if len(locs) >= 2:
            inc[t] = locs
    return inc


def find_location_cycle(location: np.ndarray, tours) -> list[tuple[int, int]] | None:
    """A cycle t1,l2,t2,l3,...,tm,l1 among nontrivial tours, or None.

    Returned as [(t1, l1), (t2, l2), ...] where tour t_i visits l_i and l_{i+1}.
    """
    inc = _incidence(location, tours)
    adj: dict[tuple[str, int], list[tuple[str, int]]] = {}
    for t in sorted(inc):
        for l in sorted(inc[t]):
            adj.setdefault(("t", t), []).append(("l", l))
            adj.setdefault(("l", l), []).append(("t", t))
    parent: dict = {}
    for root in adj:
        if root in parent:
            continue
        parent[root] = None
        stack = [(root, iter(adj[root]))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                continue
            if nxt == parent[node]:
                continue
            if nxt in parent:
                # back edge: walk up from node to nxt
                path = [node]
                while path[-1] != nxt:
                    path.append(parent[path[-1]])
                return _as_pairs(path)
            parent[nxt] = node
            stack.append((nxt, iter(adj[nxt])))
    return None


def _as_pairs(path):
    # rotate so the cycle starts at a tour node; consecutive nodes alternate kinds
    if path[0][0] != "t":
        path = path[1:] + path[:1]
    tours = [v for kind, v in path[0::2]]
    locs = [v for kind, v in path[1::2]]
    # tour t_i sits between locs[i-1] and locs[i]
    m = len(tours)
    return [(tours[i], locs[i - 1]) for i in range(m)] if m >= 2 else None


def has_location_cycle(location, solution: Solution) -> bool:
    return find_location_cycle(location, solution.tours) is not None


def eliminate_location_cycles(snapped, solution: Solution) -> Solution:
    """Swap points between tours meeting at shared locations until no cycle remains.

    ``snapped`` is a SnappedInstance or Subproblem; the solution's indices
    refer to its ``instance``. Per-tour point counts are preserved and the
    cost never increases.
    """
    inst = snapped.instance
    location = snapped.location
    if validate(inst, solution):
        raise InfeasibleError("eliminate_location_cycles needs a feasible solution")
    tours = [list(t) for t in solution.tours]
    if np.any(location[[p for t in tours for p in t]] < 0):
        raise ValueError("solution touches points without a location")

    def potential():
        return sum(len(v) for v in _incidence(location, tours).values())

    pot = potential()
    while True:
        cyc = find_location_cycle(location, tours)
        if cyc is None:
            break
        m = len(cyc)
        ts = [t for t, _ in cyc]
        ls = [l for _, l in cyc]
        # tour ts[i] visits ls[i] and ls[(i + 1) % m]
        vis = [_visits(location, tours[t]) for t in ts]
        shift = min(len(vis[i][ls[i]]) for i in range(m))
        give = [vis[i][ls[i]][-shift:] for i in range(m)]
        new = []
        for i in range(m):
            gone = set(give[i])
            seq = [p for p in tours[ts[i]] if p not in gone]
            recv = give[(i + 1) % m]
            tgt = ls[(i + 1) % m]
            at = next(j for j, p in enumerate(seq) if location[p] == tgt)
            new.append(seq[:at + 1] + recv + seq[at + 1:])
        for i in range(m):
            tours[ts[i]] = new[i]
        nxt = potential()
        if nxt >= pot:
            raise InvariantError("cycle elimination failed to decrease the visited-location count")
        pot = nxt
    out = make_solution(inst, tours, **solution.meta)
    if out.cost > solution.cost + 1e-9 * max(1.0, solution.cost):
        raise InvariantError("cycle elimination increased the cost")
    return out


# -- capping ---------------------------------------------------------------

@dataclass(frozen=True)
class CapResult:
    retained: np.ndarray  # original indices kept for nontrivial consideration
    trivial: tuple[tuple[int, ...], ...]  # full k-point tours at a single location
    limit: int  # T * k


def cap_split(count: int, limit: int, k: int) -> tuple[int, int]:
    """(trivial tours, retained points) for one location holding ``count`` points."""
    if count <= limit:
        return 0, count
    tours = -(-(count - limit) // k)
    return tours, count - tours * k


def cap_locations(snapped: SnappedInstance, T: int, k: int, indices=None) -> CapResult:
    """Cover the excess of any location holding more than T*k points with k-tours.

    Points with the largest snapping displacement go into trivial tours first.
    """
    idx = snapped.kept if indices is None else np.asarray(indices, dtype=np.intp)
    limit = int(T) * int(k)
    loc = snapped.location[idx]
    disp = snapped.displacement[idx]
    order = np.lexsort((idx, -disp, loc))
    idx, loc = idx[order], loc[order]
    bounds = np.flatnonzero(np.diff(loc)) + 1
    starts = np.concatenate([[0], bounds])
    ends = np.concatenate([bounds, [len(idx)]])
    drop = np.zeros(len(idx), dtype=bool)
    trivial = []
    for a, b in zip(starts.tolist(), ends.tolist()):
        tours_needed, _ = cap_split(b - a, limit, k)
        if not tours_needed:
            continue
        chosen = idx[a:a + tours_needed * k].tolist()
        drop[a:a + tours_needed * k] = True
        trivial.extend(tuple(chosen[j:j + k]) for j in range(0, len(chosen), k))
    retained = np.sort(idx[~drop])
    return CapResult(retained, tuple(trivial), limit)


# -- lifting ---------------------------------------------------------------

def lift_solution(snapped: SnappedInstance, sub: Subproblem, solution: Solution) -> Solution:
    """Map a solution on ``sub`` (snapped copies) back onto the original points.

    Each local copy stands for the original point it was snapped from, so the
    lifted tours visit the original points of every location in the same
    multiplicity. The returned cost is measured on original coordinates.
    """
    m = sub.instance.n
    used = np.zeros(m, dtype=np.int64)
    for t in solution.tours:
        for p in t:
            if not 0 <= p < m:
                raise InfeasibleError(f"local index {p} outside subproblem of {m} points")
            used[p] += 1
    if np.any(used != 1):
        # a location copy used twice or never: multiplicities no longer match
        bad = int(np.flatnonzero(used != 1)[0])
        raise InfeasibleError(
            f"multiplicity mismatch at location {int(sub.location[bad])} (local point {bad})"
        )
    tours = [tuple(int(sub.index_map[p]) for p in t) for t in solution.tours]
    return Solution(tuple(tours), tours_cost(snapped.original, tours), dict(solution.meta))
