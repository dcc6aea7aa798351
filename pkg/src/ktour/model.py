"""Instances, tours and solutions for the Euclidean k-tour cover problem.

Points are identified by their position in ``Instance.points``. Every tour
starts and ends at the depot (``Instance.origin``); the depot is never listed
inside a tour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

REL_TOL = 1e-9

Tour = tuple[int, ...]


class KtourError(Exception):
    """Base class for errors raised by this package."""


class InvalidIndexError(KtourError, IndexError):
    def __init__(self, index, n):
        super().__init__(f"point index {index} out of range for instance with {n} points")
        self.index = index


class CapabilityError(KtourError):
    """A solver refused an input it is not built to handle (e.g. too many points)."""


class InfeasibleError(KtourError):
    """A structural problem with a solution: overlap, missing point, bad multiplicity."""


class InvariantError(KtourError):
    """An internal guarantee failed to hold at runtime."""


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class Instance:
    """Depot, points and vehicle capacity ``k``."""

    origin: Point
    points: np.ndarray
    k: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "origin", Point(float(self.origin[0]), float(self.origin[1])))
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"capacity k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if not (np.all(np.isfinite(pts)) and math.isfinite(self.origin.x) and math.isfinite(self.origin.y)):
            raise ValueError("coordinates must be finite")

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], k: int, origin=(0.0, 0.0)) -> "Instance":
        return cls(Point(*origin), np.array(list(points), dtype=float).reshape(-1, 2), k)

    @property
    def n(self) -> int:
        return len(self.points)

    def radii(self) -> np.ndarray:
        """Distance of every point from the depot."""
        d = self.points - np.asarray(self.origin)
        return np.hypot(d[:, 0], d[:, 1])

    def subset(self, indices) -> "Instance":
        return Instance(self.origin, self.points[np.asarray(indices, dtype=np.intp)], self.k)

    def with_points(self, points) -> "Instance":
        return Instance(self.origin, points, self.k)

    def with_k(self, k: int) -> "Instance":
        return Instance(self.origin, self.points, k)


@dataclass(frozen=True)
class Solution:
    tours: tuple[Tour, ...]
    cost: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_points(self) -> int:
        return sum(len(t) for t in self.tours)


@dataclass(frozen=True)
class Bounds:
    radial: float
    tsp_upper: float
    opt_lower: float
    opt_upper: float


@dataclass(frozen=True)
class Violation:
    kind: str  # one of: index, duplicate, missing, capacity, empty, cost
    detail: str


def _check_indices(instance: Instance, tour: Sequence[int]) -> None:
    n = instance.n
    for i in tour:
        if not (0 <= i < n) or int(i) != i:
            raise InvalidIndexError(i, n)


def tour_cost(instance: Instance, tour: Sequence[int]) -> float:
    """Length of the closed walk depot -> tour[0] -> ... -> tour[-1] -> depot."""
    _check_indices(instance, tour)
    if len(tour) == 0:
        return 0.0
    pts = instance.points[np.asarray(tour, dtype=np.intp)]
    o = np.asarray(instance.origin)
    path = np.vstack([o, pts, o])
    seg = np.diff(path, axis=0)
    return float(np.hypot(seg[:, 0], seg[:, 1]).sum())


def tours_cost(instance: Instance, tours: Sequence[Sequence[int]]) -> float:
    """Total length of many tours, vectorised over one concatenated path.

    Used on large solutions where a per-tour Python loop would dominate.
    """
    if not tours:
        return 0.0
    flat = np.fromiter((i for t in tours for i in t), dtype=np.intp)
    if flat.size and (flat.min() < 0 or flat.max() >= instance.n):
        bad = flat[(flat < 0) | (flat >= instance.n)][0]
        raise InvalidIndexError(int(bad), instance.n)
    lengths = np.fromiter((len(t) for t in tours), dtype=np.intp, count=len(tours))
    o = np.asarray(instance.origin)
    pts = instance.points[flat]
    r = np.hypot(*(pts - o).T)
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    ends = starts + lengths - 1
    nonempty = lengths > 0
    total = r[starts[nonempty]].sum() + r[ends[nonempty]].sum()
    if flat.size > 1:
        step = np.hypot(*np.diff(pts, axis=0).T)
        # drop steps that jump between consecutive tours
        inner = np.ones(flat.size - 1, dtype=bool)
        inner[ends[nonempty][:-1]] = False
        total += step[inner].sum()
    return float(total)


def solution_cost(instance: Instance, solution: Solution | Sequence[Sequence[int]]) -> float:
    tours = solution.tours if isinstance(solution, Solution) else solution
    if len(tours) <= 64:
        return float(sum(tour_cost(instance, t) for t in tours))
    return tours_cost(instance, tours)


def make_solution(instance: Instance, tours: Iterable[Sequence[int]], **meta) -> Solution:
    tours = tuple(tuple(int(i) for i in t) for t in tours)
    return Solution(tours, solution_cost(instance, tours), dict(meta))


def validate(instance: Instance, solution: Solution) -> list[Violation]:
    """Feasibility report; an empty list means the solution is a valid k-tour cover."""
    report: list[Violation] = []
    n, k = instance.n, instance.k
    seen = np.zeros(n, dtype=np.int64)
    indices_ok = True
    for ti, tour in enumerate(solution.tours):
        if len(tour) == 0:
            report.append(Violation("empty", f"tour {ti} visits no points"))
        if len(tour) > k:
            report.append(Violation("capacity", f"tour {ti} visits {len(tour)} points, capacity is {k}"))
        for i in tour:
            if not (0 <= i < n):
                report.append(Violation("index", f"tour {ti} references invalid index {i}"))
                indices_ok = False
            else:
                seen[i] += 1
    for i in np.flatnonzero(seen > 1):
        report.append(Violation("duplicate", f"point {i} appears in {seen[i]} tours"))
    for i in np.flatnonzero(seen == 0):
        report.append(Violation("missing", f"point {i} is not covered"))
    if indices_ok:
        actual = solution_cost(instance, solution)
        if not math.isclose(actual, solution.cost, rel_tol=REL_TOL, abs_tol=1e-12):
            report.append(Violation("cost", f"stored cost {solution.cost!r} != recomputed {actual!r}"))
    return report


def radial_cost(instance: Instance) -> float:
    """(2/k) * sum of depot distances: a lower bound on any k-tour cover."""
    if instance.n == 0:
        return 0.0
    return float(2.0 / instance.k * instance.radii().sum())


def is_feasible(instance: Instance, solution: Solution) -> bool:
    return not validate(instance, solution)
