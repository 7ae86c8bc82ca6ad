"""(1+eps)-approximate r-nets, DelFar, fixed-center filtering and ball assignment for l1, l2 and Hamming data.

Real-valued inputs are reduced to Hamming space (l2 -> l1 -> Hamming) and
the Hamming routines run on the image. Results are mapped back by index.
At desk scale (n <= 4096) every output is checked with exact distances in
the original metric and repaired where the randomized reduction erred;
``repairs`` counts the fixes and ``raw`` holds the pre-repair verdict.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import hamming_net as hn
from .dataset import BitPointSet, Metric, PointSet
from .embed import make_gaussian_map, make_l1_family, output_dim
from .errors import CentersTooClose, EpsOutOfRange, NonPositiveRadius, ScaleExceeded
from .seeding import child
from .verify import EXACT_VERIFY_MAX_N, repair_net, verify_assignment

log = logging.getLogger(__name__)

EPS_FLOOR = 0.05
# cap on n * (embedding dimension) for real-valued inputs, about 400 MB of float64
MAX_EMBED_CELLS = 50_000_000


@dataclass
class RNet:
    centers: np.ndarray
    assignment: np.ndarray  # point index -> center point index (-1 outside the input subset)
    r: float
    eps: float
    metric: Metric
    verification: dict = field(default_factory=dict)
    repairs: int = 0
    raw: dict = field(default_factory=dict)
    k: int = 0  # Hamming dimension, 0 for real-valued inputs

    @property
    def cover_radius(self) -> float:
        if self.metric is Metric.HAMMING:
            return self.r + self.eps * self.k
        return (1 + self.eps) * self.r


@dataclass(frozen=True)
class Reduction:
    """Hamming image of a point set at one radius, shared by all routines probing that radius."""

    bits: BitPointSet
    r: float  # Hamming radius
    eps: float  # additive Hamming slack
    family: object = None


@lru_cache(maxsize=4)
def _l1_image_t(X: PointSet, eps: float, seed: int) -> np.ndarray:
    """Coordinate-major l1 image of an l2 point set."""
    g = make_gaussian_map(X.n, X.d, eps, child(seed, 1))
    return g.apply_transposed(X.points)


@lru_cache(maxsize=8)
def _reduce(X, r: float, eps: float, seed: int) -> Reduction:
    if isinstance(X, BitPointSet):
        return Reduction(X, r, eps)
    if X.n * output_dim(X.n, eps) > MAX_EMBED_CELLS:
        raise ScaleExceeded(f"embedding {X.n} points at eps={eps} needs more than {MAX_EMBED_CELLS} cells")
    XT = np.ascontiguousarray(X.points.T) if X.metric is Metric.L1 else _l1_image_t(X, eps, seed)
    fam = make_l1_family(X.n, XT.shape[0], r, eps, child(seed, 2))
    return Reduction(fam.apply_transposed(XT), fam.A0, fam.hamming_eps, fam)


def reduce_to_hamming(X, r: float, eps: float, seed: int) -> Reduction:
    return _reduce(X, float(r), float(eps), int(seed))


def _validate(X, r: float, eps: float, floor: float = 0.0) -> None:
    if isinstance(X, BitPointSet):
        if not r >= 0:
            raise NonPositiveRadius(f"radius must be non-negative, got {r}")
    elif not r > 0:
        raise NonPositiveRadius(f"radius must be positive, got {r}")
    if not floor <= eps < 1 or eps <= 0:
        raise EpsOutOfRange(f"eps must lie in [{floor}, 1), got {eps}")


def _radii(X, r: float, eps: float):
    """(packing radius, covering radius) in the original metric."""
    if isinstance(X, BitPointSet):
        return r, r + eps * X.k
    return r, (1 + eps) * r


def _members(X, members) -> np.ndarray:
    return np.arange(X.n) if members is None else np.unique(np.asarray(members, dtype=np.int64))


def approx_rnet(X, r: float, eps: float, seed: int, backend: str = "sampled", alpha: float = 0.5,
                repair: bool = True) -> RNet:
    """Approximate r-net: centers pairwise >= r apart, every point within (1+eps) r of its center.

    For a BitPointSet the covering radius is additive, ``r + eps*k``.
    """
    _validate(X, r, eps, EPS_FLOOR)
    return _approx_rnet(X, r, eps, seed, backend, alpha, repair)


def _hseed(seed, hamming_seed, tag):
    return child(seed, tag) if hamming_seed is None else child(hamming_seed, tag)


def _approx_rnet(X, r, eps, seed, backend="sampled", alpha=0.5, repair=True, members=None,
                 hamming_seed=None) -> RNet:
    """No eps floor. ``seed`` fixes the embedding; ``hamming_seed`` (default: seed) the Hamming stage."""
    members = _members(X, members)
    red = reduce_to_hamming(X, r, eps, seed)
    net = hn.hamming_rnet(red.bits, red.r, red.eps, _hseed(seed, hamming_seed, 3), backend, alpha, members)
    pack_r, cover_r = _radii(X, r, eps)
    raw = verify_assignment(X, members, net.centers, net.covered_by, pack_r, cover_r, seed)
    centers, assignment, repairs = net.centers, net.covered_by, 0
    ok = raw["packing"] and raw["covering"]
    if repair and not ok and (len(members) <= EXACT_VERIFY_MAX_N or not raw["packing"]):
        # above the exact cap only a packing failure is repaired (covering there is a spot check)
        centers, assignment, repairs = repair_net(X, members, centers, pack_r, cover_r)
        final = verify_assignment(X, members, centers, assignment, pack_r, cover_r, seed)
    else:
        final = raw
    k = X.k if isinstance(X, BitPointSet) else 0
    return RNet(np.asarray(centers), assignment, float(r), float(eps), X.metric, final, repairs, raw, k)


def delfar(X, r: float, eps: float, seed: int, backend: str = "sampled", alpha: float = 0.5,
           repair: bool = True) -> np.ndarray:
    """Indices of points that have a neighbor within ``r``; points with no neighbor within (1+eps) r are dropped."""
    _validate(X, r, eps, EPS_FLOOR)
    return _delfar(X, r, eps, seed, backend, alpha, repair)[0]


def _nn_distances(X, members) -> np.ndarray:
    nn = np.full(len(members), np.inf)
    for s in range(0, len(members), 1024):
        rows = members[s:s + 1024]
        D = X.distances(rows, members).astype(np.float64)
        D[np.arange(len(rows)), np.arange(s, s + len(rows))] = np.inf
        nn[s:s + 1024] = D.min(axis=1)
    return nn


def _delfar(X, r, eps, seed, backend="sampled", alpha=0.5, repair=True, members=None, hamming_seed=None):
    """Returns ``(F, raw_errors)`` where raw_errors counts misclassified points before repair."""
    members = _members(X, members)
    red = reduce_to_hamming(X, r, eps, seed)
    F = hn.delfar_hamming(red.bits, red.r, red.eps, _hseed(seed, hamming_seed, 4), backend, alpha, members)
    if not (repair and len(members) <= EXACT_VERIFY_MAX_N) or len(members) < 2:
        return F, None
    _, cover_r = _radii(X, r, eps)
    nn = _nn_distances(X, members)
    inF = np.isin(members, F)
    must = nn <= r
    banned = nn > cover_r
    errors = int((must & ~inF).sum() + (banned & inF).sum())
    fixed = (inF | must) & ~banned
    return members[fixed], errors


def filter_far(X, C, r: float, eps: float, seed: int, backend: str = "sampled", alpha: float = 0.5,
               repair: bool = True) -> np.ndarray:
    """Points not within ``r`` of any center in ``C``; everything beyond (1+eps) r from all of ``C`` is kept."""
    _validate(X, r, eps, EPS_FLOOR)
    return _filter_far(X, C, r, eps, seed, backend, alpha, repair)[0]


def _filter_far(X, C, r, eps, seed, backend="sampled", alpha=0.5, repair=True, members=None,
                hamming_seed=None):
    members = _members(X, members)
    C = np.unique(np.asarray(C, dtype=np.int64))
    red = reduce_to_hamming(X, r, eps, seed)
    F = hn.filter_far_hamming(red.bits, C, red.r, red.eps, _hseed(seed, hamming_seed, 5), backend, alpha,
                              members)
    if not (repair and len(members) <= EXACT_VERIFY_MAX_N):
        return F, None
    _, cover_r = _radii(X, r, eps)
    dmin = np.full(len(members), np.inf)
    for s in range(0, len(C), 1024):
        dmin = np.minimum(dmin, X.distances(members, C[s:s + 1024]).min(axis=1))
    inF = np.isin(members, F)
    errors = int(((dmin <= r) & inF).sum() + ((dmin > cover_r) & ~inF).sum())
    fixed = (inF | (dmin > cover_r)) & (dmin > r)
    return members[fixed], errors


def cover_assign(X, C, r: float, eps: float, seed: int, backend: str = "sampled", alpha: float = 0.5,
                 repair: bool = True, members=None) -> dict:
    """Disjoint sets P[c] with every point within ``r`` of ``c`` in P[c] and P[c] inside the (1+eps) r ball."""
    _validate(X, r, eps)
    C = np.unique(np.asarray(C, dtype=np.int64))
    if not len(C):
        raise CentersTooClose("center set must be nonempty")
    _, cover_r = _radii(X, r, eps)
    hn.check_separation(X, C, 2 * r * (1 + eps), seed)
    members = _members(X, members)
    red = reduce_to_hamming(X, r, eps, seed)
    P = hn.cover_assign_hamming(red.bits, C, red.r, red.eps, child(seed, 6), backend, alpha, members,
                                check=False)
    if not (repair and len(members) <= EXACT_VERIFY_MAX_N):
        return P
    # exact pass: each member goes to its nearest center when within r, stays put when inside the
    # relaxed ball, and is dropped otherwise
    D = X.distances(members, C).astype(np.float64)
    near = D.argmin(axis=1)
    dnear = D[np.arange(len(members)), near]
    owner = np.full(X.n, -1, dtype=np.int64)
    for c, pts in P.items():
        owner[pts] = c
    cur = owner[members]
    pos = np.searchsorted(C, np.maximum(cur, 0))
    dcur = np.where(cur >= 0, D[np.arange(len(members)), np.minimum(pos, len(C) - 1)], np.inf)
    cur = np.where(dcur > cover_r, -1, cur)
    cur = np.where(dnear <= r, C[near], cur)
    return {int(c): members[cur == c] for c in C}
