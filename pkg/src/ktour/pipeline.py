"""End-to-end solver: reduce the instance, solve each segment, lift and merge."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .discretize import (
    SnappedInstance,
    build_grid,
    cap_locations,
    check_eps,
    lift_solution,
    snap,
    strip_close_points,
)
from .exact import DEFAULT_LIMITS, OracleLimits, exact_ktc, held_karp_tsp
from .heuristics import cover_heuristic
from .model import (
    CapabilityError,
    InfeasibleError,
    Instance,
    KtourError,
    Solution,
    radial_cost,
    tours_cost,
)
from .rings import (
    SegmentProblem,
    build_rings,
    extract_segments,
    merge,
    select_marking,
)

log = logging.getLogger(__name__)

BASES = ("exact", "heuristic")


class StageError(KtourError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class BaseSolverChoice:
    kind: str = "heuristic"
    limits: OracleLimits = DEFAULT_LIMITS

    def __post_init__(self):
        if self.kind not in BASES:
            raise ValueError(f"base must be one of {BASES}, got {self.kind!r}")

    def solve(self, instance: Instance) -> Solution:
        if self.kind == "exact":
            if instance.n > self.limits.max_points_dp:
                raise CapabilityError(
                    f"segment has {instance.n} points, exact base is limited to "
                    f"{self.limits.max_points_dp}; use --base heuristic"
                )
            return exact_ktc(instance, self.limits)
        return cover_heuristic(instance)


@dataclass(frozen=True, eq=False)
class ReductionResult:
    instance: Instance
    snapped: SnappedInstance | None
    stripped_tours: tuple[tuple[int, ...], ...]
    cap_tours: tuple[tuple[int, ...], ...]
    marked_cover: tuple[tuple[int, ...], ...]
    segments: list[SegmentProblem]
    log: dict = field(default_factory=dict)

    @property
    def mandatory_tours(self) -> tuple[tuple[int, ...], ...]:
        return self.stripped_tours + self.cap_tours + self.marked_cover

    def segment_points(self) -> int:
        return sum(s.instance.n for s in self.segments)

    def accounting(self) -> np.ndarray:
        """How many times each original point is accounted for (should be all ones)."""
        seen = np.zeros(self.instance.n, dtype=np.int64)
        for t in self.mandatory_tours:
            np.add.at(seen, list(t), 1)
        for s in self.segments:
            np.add.at(seen, s.index_map, 1)
        return seen


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except KtourError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise StageError(name, exc) from exc


def reduce(instance: Instance, eps: float, refine: bool = True, period: int | None = None) -> ReductionResult:
    """Strip, snap, cap and (with ``refine``) split into ring segments.

    ``refine=False`` caps multiplicities against the global location count and
    returns a single segment; ``refine=True`` selects a ring marking, covers the
    marked rings heuristically, and caps each segment against its own
    location count. ``period`` overrides the marking period (testing only).
    """
    eps = check_eps(eps)
    n, k = instance.n, instance.k
    info = {"eps": eps, "n": n, "k": k, "refine": refine}
    st = _stage("strip", strip_close_points, instance, eps)
    stripped_tours = tuple((i,) for i, _ in st.stripped)
    info.update(L=st.L, stripped=len(st.stripped), stripped_cost=st.stripped_cost,
                stripped_bound=st.cost_bound)
    if len(st.kept) == 0:
        info.update(T=0, q=0)
        return ReductionResult(instance, None, stripped_tours, (), (), [], info)

    grid = _stage("grid", build_grid, st.L, n, k, eps)
    snapped = _stage("snap", snap, instance, grid, st)
    disp = snapped.displacement[snapped.kept]
    info.update(T=grid.T, circles=grid.circle_count, rays=grid.ray_count,
                max_snap_ratio=float(np.max(disp / (eps / k * instance.radii()[snapped.kept]))),
                snap_lift_bound=float(2 * disp.sum()))

    if not refine:
        capped = _stage("cap", cap_locations, snapped, grid.T, k)
        sub = snapped.subproblem(capped.retained)
        seg = SegmentProblem(0, range(0), sub, (), grid.T)
        info.update(q=1, cap_tours=len(capped.trivial), segment_points=[sub.instance.n])
        return ReductionResult(instance, snapped, stripped_tours, capped.trivial, (), [seg], info)

    layout = _stage("rings", build_rings, grid, eps)
    choice = _stage("marking", select_marking, snapped, layout, eps, period)
    unmarked = np.setdiff1d(snapped.kept, choice.marked_points)
    segments = _stage("segments", extract_segments, snapped, choice.partition, unmarked)
    cap_tours = tuple(t for s in segments for t in s.trivial)
    info.update(w=layout.width, ring_count=layout.ring_count, a=choice.partition.period,
                b=choice.partition.residue, marked_points=len(choice.marked_points),
                marked_cover_cost=choice.cover.cost, q=len(segments),
                runs=choice.partition.run_count(), cap_tours=len(cap_tours),
                segment_points=[s.instance.n for s in segments])
    return ReductionResult(instance, snapped, stripped_tours, cap_tours, tuple(choice.cover.tours),
                           segments, info)


def resequence(instance: Instance, solution: Solution, limits: OracleLimits = DEFAULT_LIMITS) -> Solution:
    """Re-order every tour optimally on ``instance``'s coordinates (same partition)."""
    tours = []
    for t in solution.tours:
        if 3 < len(t) <= limits.max_points_dp:
            order = held_karp_tsp(instance.subset(t), limits).order
            tours.append(tuple(t[i] for i in order))
        else:
            tours.append(tuple(t))
    cost = tours_cost(instance, tours)
    if cost > solution.cost:
        return solution
    return Solution(tuple(tours), cost, dict(solution.meta))


def _solve_segment(base: BaseSolverChoice, snapped: SnappedInstance, seg: SegmentProblem) -> Solution:
    if seg.instance.n == 0:
        return Solution((), 0.0)
    local = base.solve(seg.instance)
    lifted = lift_solution(snapped, seg.sub, local)
    if base.kind == "exact":
        # snapped-optimal orders need not be optimal once points move back
        lifted = resequence(snapped.original, lifted, base.limits)
    return lifted


def solve(instance: Instance, eps: float, base: str | BaseSolverChoice = "heuristic",
          threads: int = 1, refine: bool = True, period: int | None = None,
          guard: bool = True) -> Solution:
    """Approximate k-tour cover through the reduction.

    Segment solutions are computed on snapped coordinates, lifted to the
    original points, and merged in segment order regardless of ``threads``.
    With ``guard`` the direct heuristic is also run and returned instead if it
    is strictly cheaper; ``meta["winner"]`` records which path won.
    """
    if not isinstance(base, BaseSolverChoice):
        base = BaseSolverChoice(base)
    if instance.n == 0:
        return Solution((), 0.0, {"eps": eps, "base": base.kind})
    red = reduce(instance, eps, refine=refine, period=period)
    segs = red.segments
    if base.kind == "exact":
        too_big = [s for s in segs if s.instance.n > base.limits.max_points_dp]
        if too_big:
            raise CapabilityError(
                f"segment {too_big[0].index} has {too_big[0].instance.n} points, exact base is "
                f"limited to {base.limits.max_points_dp}; use --base heuristic"
            )
    if threads > 1 and len(segs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: _solve_segment(base, red.snapped, s), segs))
    else:
        parts = [_solve_segment(base, red.snapped, s) for s in segs]
    try:
        merged = merge(instance, red.stripped_tours, red.cap_tours, red.marked_cover, *parts)
    except InfeasibleError as exc:
        raise StageError("merge", exc) from exc
    meta = dict(red.log)
    meta.update(base=base.kind, segment_bases=[base.kind] * len(segs),
                segment_costs=[p.cost for p in parts], radial=radial_cost(instance),
                reduced_cost=merged.cost, winner="reduction")
    if guard:
        direct = cover_heuristic(instance)
        meta["heuristic_cost"] = direct.cost
        if direct.cost < merged.cost:
            meta["winner"] = "heuristic"
            return Solution(direct.tours, direct.cost, meta)
    return Solution(merged.tours, merged.cost, meta)


def solve_direct(instance: Instance, strategy: str = "heuristic",
                 limits: OracleLimits = DEFAULT_LIMITS) -> Solution:
    """Solve without reduction: exact subset DP or the MST + partitioning heuristic."""
    if strategy == "exact":
        return exact_ktc(instance, limits)
    if strategy == "heuristic":
        return cover_heuristic(instance)
    raise ValueError(f"strategy must be 'exact' or 'heuristic', got {strategy!r}")
