"""Applications: k-th smallest nearest-neighbor distance, Min-Max clustering,
k-center clustering via a decider, and approximate greedy permutations."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Protocol

import numpy as np

from .dataset import BitPointSet, distinct_representatives
from .embed import output_dim
from .errors import (
    AllPointsIdentical,
    CentersTooClose,
    EpsOutOfRange,
    InfeasibleFamily,
    KOutOfRange,
    ScaleExceeded,
)
from .netprune import Above, Below, Interval, netprune_search, refine_interval
from .rnet import _approx_rnet, _delfar, _filter_far, cover_assign
from .seeding import child, generator

log = logging.getLogger(__name__)

# largest n * (embedding dimension) a Min-Max run may request
MINMAX_MAX_CELLS = 50_000_000


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise EpsOutOfRange(f"eps must lie in (0, 1), got {eps}")


def _check_k(X, k: int) -> None:
    if not 1 <= k <= X.n:
        raise KOutOfRange(f"k must lie in [1, {X.n}], got {k}")


@dataclass
class Clustering:
    centers: np.ndarray
    assignment: np.ndarray  # point index -> center point index
    radius: float
    info: dict = field(default_factory=dict)


def nearest_clustering(X, centers, info=None) -> Clustering:
    """Assign every point to its nearest center (lowest position on ties); radius is exact."""
    centers = np.asarray(centers, dtype=np.int64)
    assignment = np.empty(X.n, dtype=np.int64)
    radius = 0.0
    for s in range(0, X.n, 1024):
        rows = np.arange(s, min(X.n, s + 1024))
        D = X.distances(rows, centers).astype(np.float64)
        arg = D.argmin(axis=1)
        assignment[rows] = centers[arg]
        radius = max(radius, float(D[np.arange(len(rows)), arg].max()))
    return Clustering(centers, assignment, radius, info or {})


def assigned_radius(X, assignment) -> float:
    """Largest distance between a point and the center it is assigned to."""
    assignment = np.asarray(assignment)
    best = 0.0
    for c in np.unique(assignment):
        pts = np.flatnonzero(assignment == c)
        best = max(best, float(X.distances([c], pts).max()))
    return best


class _Counter:
    def __init__(self, seed: int, tag: int):
        self.seed, self.tag, self.calls = seed, tag, 0

    def next(self) -> int:
        self.calls += 1
        return child(self.seed, self.tag, self.calls)


# ---------------------------------------------------------------- k-th NN distance

class KthNNDecider:
    """DelFar-counting decider for the k-th smallest nearest-neighbor distance."""

    def __init__(self, k: int, eps: float, seed: int, backend: str = "sampled"):
        self.k, self.eps, self.backend = k, eps, backend
        self.embed_seed = child(seed, 50)
        self._seeds = _Counter(seed, 51)

    def decide(self, r: float, X):
        e = self.eps / 4
        s = self._seeds.next()
        w1, _ = _delfar(X, r / (1 + e), e, self.embed_seed, self.backend, hamming_seed=s)
        if len(w1) >= self.k:
            return Below(r)
        w2, _ = _delfar(X, r, e, self.embed_seed, self.backend, hamming_seed=child(s, 1))
        if len(w2) < self.k:
            return Above(r)
        return Interval(r / (1 + e), (1 + e) * r)


def kth_nn_distance(X, k: int, eps: float, seed: int, mode: str = "driver", backend: str = "sampled") -> float:
    """(1+eps)-approximation of the k-th smallest of the n nearest-neighbor distances."""
    _check_eps(eps)
    if X.n < 2:
        raise KOutOfRange("need at least two points")
    _check_k(X, k)
    reps, rep = distinct_representatives(X)
    counts = np.bincount(rep, minlength=X.n)
    if k <= int((counts[rep] > 1).sum()):
        return 0.0  # duplicates have nearest-neighbor distance 0
    D = KthNNDecider(k, eps, seed, backend)
    found = netprune_search(X, D, child(seed, 52), mode)
    # the search's own Interval outcomes may be tighter than a (1+eps) slice
    if found.hi <= found.lo * (1 + eps / 2):
        return float(found.hi)
    return refine_interval(found.lo, found.hi, D, eps / 2, X).value


# ---------------------------------------------------------------- k-center, decider route

class KCenterDecider:
    """Net-size decider: a net with at most k centers certifies an upper bound, more than k a lower one."""

    def __init__(self, k: int, eps: float, seed: int, backend: str = "sampled"):
        self.k, self.eps, self.backend = k, eps, backend
        self.delta = max(eps / 32, 0.05)
        self.embed_seed = child(seed, 60)
        self._seeds = _Counter(seed, 61)

    def net(self, X, rho: float):
        return _approx_rnet(X, rho, self.delta, self.embed_seed, self.backend, hamming_seed=self._seeds.next())

    def decide(self, r: float, X):
        d = self.delta
        n1 = self.net(X, r / (1 + 2 * d))
        if len(n1.centers) <= self.k:
            return Below(r, n1)
        n2 = self.net(X, 2 * (1 + 2 * d) * r)
        if len(n2.centers) <= self.k:
            return Interval(r / (2 * (1 + 2 * d)), 2 * (1 + 2 * d) * (1 + d) * r, n2)
        return Above((1 + 2 * d) * r)


def kcenter_4eps(X, k: int, eps: float, seed: int, mode: str = "driver", backend: str = "sampled") -> Clustering:
    """k-center clustering with radius at most (4+eps) times the optimum (centers at data points)."""
    _check_eps(eps)
    _check_k(X, k)
    reps, _ = distinct_representatives(X)
    if k >= len(reps):
        return nearest_clustering(X, reps, {"lo": 0.0, "hi": 0.0})
    D = KCenterDecider(k, eps, seed, backend)
    found = netprune_search(X, D, child(seed, 62), mode)
    # bisect on the net radius: a net with > k centers at rho proves OPT >= rho/2,
    # and a net with <= k centers at rho is a clustering of radius <= (1+delta) rho
    lo = 2 * found.lo
    hi = 2 * found.hi * (1 + D.delta)
    best = D.net(X, hi)
    while len(best.centers) > k:  # only possible when the search's upper bound was wrong
        hi *= 2
        best = D.net(X, hi)
    while hi > (1 + eps / 8) * lo:
        mid = math.sqrt(lo * hi)
        net = D.net(X, mid)
        if len(net.centers) <= k:
            hi, best = mid, net
        else:
            lo = mid
    return nearest_clustering(X, best.centers, {"lo": found.lo, "hi": found.hi, "net_radius": hi,
                                                "probes": found.probes})


# ---------------------------------------------------------------- Min-Max clustering

class SketchableFamily(Protocol):
    def sketch(self, i: int): ...

    def merge(self, a, b): ...

    def orac(self, s) -> bool: ...


@dataclass(frozen=True)
class MinSize:
    """Sets with at least ``m`` points."""
    m: int

    def sketch(self, i):
        return 1

    def merge(self, a, b):
        return a + b

    def orac(self, s) -> bool:
        return s >= self.m


@dataclass(frozen=True)
class All:
    def sketch(self, i):
        return None

    def merge(self, a, b):
        return None

    def orac(self, s) -> bool:
        return True


FAMILIES: dict[str, Callable[..., SketchableFamily]] = {
    "minsize": lambda arg: MinSize(int(arg)),
    "all": lambda arg=None: All(),
}


def register_family(name: str, factory: Callable[..., SketchableFamily]) -> None:
    FAMILIES[name] = factory


def parse_family(text: str) -> SketchableFamily:
    name, _, arg = text.partition(":")
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
    return FAMILIES[name](arg) if arg else FAMILIES[name]()


def member(F: SketchableFamily, points) -> bool:
    return bool(F.orac(reduce(F.merge, (F.sketch(int(i)) for i in points))))


class MinMaxDecider:
    def __init__(self, F: SketchableFamily, eps: float, seed: int, backend: str = "sampled"):
        self.F, self.eps, self.backend = F, eps, backend
        self.delta = eps / 10
        self.embed_seed = child(seed, 70)
        self._seeds = _Counter(seed, 71)
        self.tests = 0

    def test(self, X, r: float):
        """Cluster at scale r, or None when some 2r-ball set falls outside the family."""
        self.tests += 1
        d = self.delta
        for attempt in range(4):
            rho = r * (1 + self.eps / 64) ** attempt
            net = _approx_rnet(X, 4 * rho * (1 + d), d, self.embed_seed, self.backend,
                               hamming_seed=self._seeds.next())
            try:
                P = cover_assign(X, net.centers, 2 * rho, d, self._seeds.next(), self.backend)
            except CentersTooClose:
                log.info("centers too close at r=%g; nudging the radius", rho)
                continue
            break
        else:
            raise CentersTooClose(f"no separated net near r={r:g}")
        if not all(member(self.F, pts) for pts in P.values() if len(pts)) or \
                any(not len(pts) for pts in P.values()):
            return None
        # points outside every ball join their nearest center; upward closure keeps membership
        base = nearest_clustering(X, net.centers)
        assignment = base.assignment.copy()
        for c, pts in P.items():
            assignment[pts] = c
        return Clustering(np.asarray(net.centers), assignment, assigned_radius(X, assignment))

    def decide(self, r: float, X):
        d = self.delta
        got = self.test(X, r)
        if got is None:
            return Above(r)
        tighter = self.test(X, r / (1 + d))
        if tighter is None:
            return Interval(r / (1 + d), 4 * (1 + d) ** 2 * r, got)
        return Below(4 * (1 + d) * r, tighter)


def minmax_cluster(X, F: SketchableFamily, eps: float, seed: int, mode: str = "driver",
                   backend: str = "sampled") -> Clustering:
    """Partition into balls centered at data points whose point sets belong to ``F``.

    The largest ball radius is at most (4+eps) times the optimal Min-Max cost.
    """
    _check_eps(eps)
    everything = np.arange(X.n)
    if not member(F, everything):
        raise InfeasibleFamily("the full point set is not in the family; no valid clustering exists")
    if all(member(F, [i]) for i in everything):
        return Clustering(everything, everything.copy(), 0.0, {"singletons": True})
    reps, _ = distinct_representatives(X)
    if len(reps) == 1:
        return Clustering(reps, np.full(X.n, reps[0]), 0.0, {})
    D = MinMaxDecider(F, eps, seed, backend)
    if not isinstance(X, BitPointSet) and X.n * output_dim(X.n, D.delta) > MINMAX_MAX_CELLS:
        raise ScaleExceeded(f"Min-Max at n={X.n}, eps={eps} needs an embedding beyond {MINMAX_MAX_CELLS} cells")
    found = netprune_search(X, D, child(seed, 72), mode)
    gamma = eps / 40
    lo, hi = found.lo, found.hi
    best = D.test(X, hi)
    while best is None:  # the search's upper bound was wrong
        lo, hi = hi, 2 * hi
        best = D.test(X, hi)
    while hi > (1 + gamma) * lo:
        mid = math.sqrt(lo * hi)
        got = D.test(X, mid)
        if got is None:
            lo = mid
        else:
            hi, best = mid, got
    best.info = {"lo": found.lo, "hi": found.hi, "scale": hi, "tests": D.tests}
    return best


# ---------------------------------------------------------------- greedy permutation

@dataclass
class GreedyPermutation:
    order: np.ndarray
    radii: np.ndarray  # radii[j-1] bounds the prefix of length j, j = 1..n-1
    eps: float
    rounds: int
    round_bound: int | None = None


def schedule_ratio(eps: float) -> float:
    """Per-round shrink factor minus one; chosen so that (1 + it)^2 = 1 + eps/2."""
    return math.sqrt(1 + eps / 2) - 1


def greedy_permutation(X, eps: float, seed: int, backend: str = "sampled",
                       diagnostics: bool = False) -> GreedyPermutation:
    """(1+eps)-greedy permutation by filtering and netting on a geometric radius schedule."""
    _check_eps(eps)
    if X.n < 2:
        raise AllPointsIdentical("need at least two points")
    reps, _ = distinct_representatives(X)
    if len(reps) < 2:
        raise AllPointsIdentical("all points coincide")
    e = schedule_ratio(eps)
    rng = generator(seed, 80)
    start = int(reps[rng.integers(len(reps))])
    dist = X.distances([start], reps)[0].astype(np.float64)
    far = int(reps[np.argmax(dist)])  # argmax keeps the lowest index among ties
    delta = float(dist.max())
    order = [start, far]
    radii = [delta]
    placed = np.zeros(X.n, dtype=bool)
    placed[[start, far]] = True
    to_s = np.minimum(dist, X.distances([far], reps)[0])
    embed_seed = child(seed, 81)
    rounds = 0
    i = 1
    while not placed[reps].all():
        gap = float(to_s.max())
        # rounds whose radius is at least the current gap have nothing to add
        i = max(i + 1, math.floor(math.log(delta / gap) / math.log1p(e)) + 1)
        while delta / (1 + e) ** (i - 1) >= gap:
            i += 1
        r_i = delta / (1 + e) ** (i - 1)
        s = child(seed, 82, i)
        S = np.array(order, dtype=np.int64)
        pending = reps[~placed[reps]]
        F, _ = _filter_far(X, S, r_i, e, embed_seed, backend, members=pending, hamming_seed=s)
        if not len(F):
            continue
        net = _approx_rnet(X, r_i, e, embed_seed, backend, members=F, hamming_seed=child(s, 1))
        new = np.sort(net.centers)
        rounds += 1
        # every prefix whose next point comes from this round is reported at r_i
        radii.extend([r_i] * len(new))
        order.extend(int(c) for c in new)
        placed[new] = True
        to_s = np.minimum(to_s, X.distances(new, reps).min(axis=0))
    dup = np.setdiff1d(np.arange(X.n), reps)
    if len(dup):
        radii.extend([0.0] * len(dup))
        order.extend(int(p) for p in dup)
    bound = None
    if diagnostics:
        from .dataset import spread
        bound = math.ceil(math.log(spread(X)) / math.log1p(e)) + 2
    return GreedyPermutation(np.array(order), np.array(radii), eps, rounds, bound)


def kcenter_2eps(X, k: int, eps: float, seed: int, backend: str = "sampled") -> Clustering:
    """The first k points of a greedy permutation; radius at most (2+eps) times the optimum."""
    _check_eps(eps)
    _check_k(X, k)
    reps, _ = distinct_representatives(X)
    if k >= len(reps):
        return nearest_clustering(X, reps)
    perm = greedy_permutation(X, eps, seed, backend)
    return nearest_clustering(X, perm.order[:k], {"prefix_radius": float(perm.radii[k - 1])})
