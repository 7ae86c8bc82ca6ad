"""Seeded synthetic point sets for tests, benchmarks and the CLI."""

import numpy as np

from .dataset import BitPointSet, Metric, PointSet
from .seeding import generator


def gaussian(n: int, d: int, seed: int, metric="l2") -> PointSet:
    return PointSet(generator(seed, 900).standard_normal((n, d)), Metric(metric))


def uniform(n: int, d: int, seed: int, metric="l2", scale: float = 1.0) -> PointSet:
    return PointSet(scale * generator(seed, 901).random((n, d)), Metric(metric))


def clustered(n: int, d: int, seed: int, clusters: int = 8, spread: float = 0.1, metric="l2") -> PointSet:
    """Gaussian blobs around uniform centers in the unit cube."""
    rng = generator(seed, 902)
    centers = rng.random((clusters, d))
    labels = rng.integers(clusters, size=n)
    return PointSet(centers[labels] + spread * rng.standard_normal((n, d)), Metric(metric))


def random_bits(n: int, k: int, seed: int, p: float = 0.5) -> BitPointSet:
    return BitPointSet.from_bits((generator(seed, 903).random((n, k)) < p).astype(np.uint8))


def clustered_bits(n: int, k: int, seed: int, clusters: int = 8, flip: float = 0.05) -> BitPointSet:
    """Random centers in {0,1}^k with each coordinate flipped independently with probability ``flip``."""
    rng = generator(seed, 904)
    centers = rng.integers(0, 2, size=(clusters, k), dtype=np.uint8)
    labels = rng.integers(clusters, size=n)
    noise = (rng.random((n, k)) < flip).astype(np.uint8)
    return BitPointSet.from_bits(centers[labels] ^ noise)


def line(values, metric="l1") -> PointSet:
    """Points on the real line, handy for hand-checkable examples."""
    return PointSet(np.asarray(values, dtype=np.float64).reshape(-1, 1), Metric(metric))
