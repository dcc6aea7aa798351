"""Seeded random instances around a depot at the origin."""

from __future__ import annotations

import numpy as np

from .model import Instance

DISTRIBUTIONS = ("uniform-disk", "clustered", "annulus")


def _uniform_disk(rng, n):
    r = np.sqrt(rng.random(n))
    a = rng.random(n) * 2 * np.pi
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


def _clustered(rng, n):
    centers = _uniform_disk(rng, max(1, min(5, n // 4))) * 0.8
    which = rng.integers(0, len(centers), n)
    return centers[which] + rng.normal(scale=0.08, size=(n, 2))


def _annulus(rng, n):
    r = rng.uniform(0.5, 1.0, n)
    a = rng.random(n) * 2 * np.pi
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


_GENERATORS = {"uniform-disk": _uniform_disk, "clustered": _clustered, "annulus": _annulus}


def generate(n: int, k: int, seed: int = 0, dist: str = "uniform-disk") -> Instance:
    """Instance with ``n`` points drawn from ``dist`` using ``numpy.random.default_rng(seed)``.

    uniform-disk: uniform in the unit disk. clustered: up to five Gaussian
    blobs (sd 0.08) centred in the disk of radius 0.8. annulus: radius uniform
    in [0.5, 1], angle uniform.
    """
    if dist not in _GENERATORS:
        raise ValueError(f"unknown distribution {dist!r}; choose from {', '.join(DISTRIBUTIONS)}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    pts = _GENERATORS[dist](rng, n) if n else np.zeros((0, 2))
    return Instance((0.0, 0.0), pts, k)


def describe(n: int, k: int, seed: int, dist: str) -> str:
    return f"generated by ktour gen: dist={dist} n={n} k={k} seed={seed} rng=numpy.default_rng"
