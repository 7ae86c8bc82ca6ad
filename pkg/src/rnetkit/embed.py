"""Metric reductions: l1 -> Hamming by randomized grid hashing, l2 -> l1 by Gaussian projection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import BitPointSet, Metric, PointSet
from .kernels import grid_hash_bits
from .errors import BadFormat, EpsOutOfRange, NonPositiveRadius
from .seeding import generator

# output dimension factor for both maps
C4 = 8.0
# slack of the Hamming thresholds, in units of sqrt(k ln n); frozen by scripts/calibrate_embedding.py
C6 = 0.17
# inputs up to this dimension hash every coordinate per bit; wider inputs use HASH_COORDS
HASH_FULL_MAX_D = 32
HASH_COORDS = 8
# guaranteed gap (A1 - A0) / (k eps) implied by C4 and C6 for every eps in (0, 1)
C5 = 0.002


def output_dim(n: int, eps: float) -> int:
    return math.ceil(C4 * eps ** -2 * math.log(max(n, 2)))


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise EpsOutOfRange(f"eps must lie in (0, 1), got {eps}")


def coords_per_bit(d: int) -> int:
    return d if d <= HASH_FULL_MAX_D else HASH_COORDS


def collision_gap(m: int, eps: float) -> tuple[float, float]:
    """Per-bit disagreement probabilities at distance r and (1+eps) r when m coordinates feed each bit."""
    a0 = 0.5 * (1 - (1 - 1 / (2 * m)) ** m)
    a1 = 0.5 * (1 - (1 - (1 + eps) / (2 * m)) ** m)
    return a0, a1


@dataclass(frozen=True)
class L1HashFamily:
    """A materialized grid-hash family mapping l1 points to k bits.

    Bit i is the parity of random sign-hashes of the grid cells
    ``floor((p[a_ij] + b_ij) / w)`` over m sampled coordinates, with
    bucket width ``w = 2r m / d`` so that a pair at l1 distance x differs
    in one cell with probability at most x / (2 r m).
    """

    r: float
    eps: float
    n: int
    d: int
    k: int
    m: int
    coords: np.ndarray
    offsets: np.ndarray  # b_ij / w, in [0, 1)
    mult: np.ndarray
    add: np.ndarray
    alpha0: float
    alpha1: float
    A0: float
    A1: float

    @property
    def width(self) -> float:
        return 2.0 * self.r * self.m / self.d

    @property
    def hamming_eps(self) -> float:
        """Additive slack handed to the Hamming stage: covering reaches A1."""
        return (self.A1 - self.A0) / self.k

    def apply(self, points: np.ndarray) -> BitPointSet:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != self.d:
            raise BadFormat(f"expected points of dimension {self.d}")
        return self.apply_transposed(np.ascontiguousarray(points.T))

    def apply_transposed(self, XT: np.ndarray) -> BitPointSet:
        """Hash a coordinate-major (d x n) array."""
        words = grid_hash_bits(XT, self.coords, self.offsets, self.mult, self.add, 1.0 / self.width)
        return BitPointSet(words, self.k)


def make_l1_family(n: int, d: int, r: float, eps: float, seed: int) -> L1HashFamily:
    if not r > 0 or not math.isfinite(r):
        raise NonPositiveRadius(f"radius must be positive, got {r}")
    _check_eps(eps)
    k = output_dim(n, eps)
    rng = generator(seed, 20)
    m = coords_per_bit(d)
    coords = rng.integers(0, d, size=(k, m))
    offsets = rng.random((k, m))
    mult = rng.integers(0, 2 ** 64, size=(k, m), dtype=np.uint64) | np.uint64(1)
    add = rng.integers(0, 2 ** 64, size=(k, m), dtype=np.uint64)
    a0, a1 = collision_gap(m, eps)
    slack = C6 * math.sqrt(k * math.log(max(n, 2)))
    return L1HashFamily(float(r), float(eps), n, d, k, m, coords, offsets, mult, add,
                        a0, a1, a0 * k + slack, a1 * k - slack)


def l1_to_hamming(X: PointSet, r: float, eps: float, seed: int):
    """Map an l1 point set to Hamming space; returns ``(bits, family)``."""
    if X.metric is not Metric.L1:
        raise BadFormat("l1_to_hamming needs an l1 point set")
    fam = make_l1_family(X.n, X.d, r, eps, seed)
    return fam.apply(X.points), fam


@dataclass(frozen=True)
class GaussianMap:
    sigma: np.ndarray  # k x d
    scale: float

    @property
    def k(self) -> int:
        return self.sigma.shape[0]

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Projected and scaled coordinates, so l1 distances estimate l2 distances."""
        return self.scale * (np.asarray(points, dtype=np.float64) @ self.sigma.T)

    def apply_transposed(self, points: np.ndarray) -> np.ndarray:
        """Same image, coordinate-major (k x n)."""
        return self.scale * (self.sigma @ np.asarray(points, dtype=np.float64).T)


def make_gaussian_map(n: int, d: int, eps: float, seed: int) -> GaussianMap:
    _check_eps(eps)
    k = output_dim(n, eps)
    sigma = generator(seed, 21).standard_normal((k, d))
    return GaussianMap(sigma, math.sqrt(math.pi / 2) / k)


def l2_to_l1(X: PointSet, eps: float, seed: int) -> PointSet:
    """Gaussian projection to l1; the scale constant is already applied."""
    if X.metric is not Metric.L2:
        raise BadFormat("l2_to_l1 needs an l2 point set")
    g = make_gaussian_map(X.n, X.d, eps, seed)
    return PointSet(g.apply(X.points), Metric.L1, X.ids)


def separation_violations(X: PointSet, bits: BitPointSet, fam: L1HashFamily, A0=None, A1=None) -> dict:
    """Fractions of near pairs (<= r) hashed above A0 and of far pairs (>= (1+eps) r) hashed below A1."""
    from scipy.spatial.distance import pdist

    A0 = fam.A0 if A0 is None else A0
    A1 = fam.A1 if A1 is None else A1
    iu = np.triu_indices(X.n, 1)
    d = pdist(X.points, metric="cityblock")
    h = bits.distances()[iu].astype(np.float64)
    near = d <= fam.r
    far = d >= (1 + fam.eps) * fam.r
    near_bad = float((h[near] > A0).mean()) if near.any() else 0.0
    far_bad = float((h[far] < A1).mean()) if far.any() else 0.0
    # combined rate over all constrained pairs
    both = int(near.sum() + far.sum())
    combined = float(((h > A0) & near).sum() + ((h < A1) & far).sum()) / both if both else 0.0
    return {"near": near_bad, "far": far_bad, "combined": combined, "near_pairs": int(near.sum()),
            "far_pairs": int(far.sum())}
