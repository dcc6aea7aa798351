"""Euclidean k-tour cover (unit-demand capacitated vehicle routing) toolkit."""

from .discretize import (
    LocationGrid,
    SnappedInstance,
    build_grid,
    cap_locations,
    discretize,
    eliminate_location_cycles,
    lift_solution,
    snap,
    strip_close_points,
)
from .exact import OracleLimits, exact_ktc, held_karp_tsp, naive_ktc
from .heuristics import TspTour, bounds, cover_heuristic, itp, mst_tsp_tour
from .model import (
    Bounds,
    CapabilityError,
    InfeasibleError,
    Instance,
    InvalidIndexError,
    InvariantError,
    Point,
    Solution,
    radial_cost,
    solution_cost,
    tour_cost,
    validate,
)
from .pipeline import BaseSolverChoice, ReductionResult, reduce, solve, solve_direct
from .rings import (
    RingPartition,
    build_rings,
    extract_segments,
    merge,
    ring_respecting_transform,
    select_marking,
)

__version__ = "0.1.0"
