"""Approximate r-nets with additive error in Hamming space.

The pipeline is: a sparsification pass of ceil(sqrt(n)) random brute-force
rounds, an indicator matrix over the survivors, and a column sweep that
promotes centers and deletes the points of every flagged cell that lie
within ``r + eps*k``. DelFar, fixed-center filtering and ball assignment
reuse the same two stages.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import BitPointSet, hamming_block
from .errors import CentersTooClose, InvalidThreshold, RetriesExhausted, TooManyCloseEntries
from .indicator import block_indicator_matrix
from .seeding import child, generator

log = logging.getLogger(__name__)

MAX_RESTARTS = 5
CLOSE_EXPONENT = 1.7
EXACT_CHECK_MAX_N = 4096


@dataclass
class HammingNet:
    centers: np.ndarray
    covered_by: np.ndarray  # point index -> center point index, -1 outside the input subset
    r: float
    eps: float
    k: int
    attempts: int = 1
    stats: dict = field(default_factory=dict)

    @property
    def cover_radius(self) -> float:
        return self.r + self.eps * self.k


def _members(X: BitPointSet, members) -> np.ndarray:
    if members is None:
        return np.arange(X.n)
    return np.unique(np.asarray(members, dtype=np.int64))


def _check_params(X: BitPointSet, r: float, eps: float) -> None:
    if not 0 < eps < 1:
        raise InvalidThreshold(f"eps must lie in (0, 1), got {eps}")
    if r < 0:
        raise InvalidThreshold(f"radius must be non-negative, got {r}")


def sparsify(X: BitPointSet, r: float, eps: float, seed: int, members=None):
    """Random brute-force rounds.

    Returns ``(survivors, centers, covered_by)`` where ``covered_by`` maps
    every deleted point to the center that removed it (-1 elsewhere).
    """
    _check_params(X, r, eps)
    alive = _members(X, members)
    cut = r + eps * X.k
    rng = generator(seed, 10)
    covered_by = np.full(X.n, -1, dtype=np.int64)
    centers = []
    for _ in range(math.ceil(math.sqrt(len(alive)))):
        if not len(alive):
            break
        c = int(alive[rng.integers(len(alive))])
        dist = hamming_block(X.words[c:c + 1], X.words[alive])[0]
        gone = dist <= cut
        covered_by[alive[gone]] = c
        centers.append(c)
        alive = alive[~gone]
    return alive, np.array(centers, dtype=np.int64), covered_by


def close_pairs(X: BitPointSet, r: float, eps: float, seed: int, members, queries,
                backend: str = "sampled", alpha: float = 0.5, close_limit=None):
    """Exactly verified pairs (member, query, distance) with distance <= r + eps*k.

    Only cells the indicator matrix flags for a query are examined, so a
    close pair can be missed when a randomized backend errs.
    """
    members = np.asarray(members, dtype=np.int64)
    queries = np.asarray(queries, dtype=np.int64)
    empty = np.empty(0, dtype=np.int64)
    if not len(members) or not len(queries):
        return empty, empty, empty
    M = block_indicator_matrix(X, r, eps, alpha, backend, seed, members=members, queries=queries)
    close = M.close()
    limit = close_limit if close_limit is not None else max(len(members), len(queries)) ** CLOSE_EXPONENT
    flagged = int(close.sum())
    if flagged > limit:
        raise TooManyCloseEntries(f"{flagged} flagged entries exceed the limit {limit:.0f}")
    cut = r + eps * X.k
    ms, qs, ds = [], [], []
    for i, cell in enumerate(M.partition):
        cols = np.flatnonzero(close[i])
        if not len(cols):
            continue
        q = M.queries[cols]
        dist = hamming_block(X.words[cell], X.words[q])
        a, b = np.nonzero(dist <= cut)
        ms.append(cell[a])
        qs.append(q[b])
        ds.append(dist[a, b])
    if not ms:
        return empty, empty, empty
    return np.concatenate(ms), np.concatenate(qs), np.concatenate(ds)


def assemble_net(X: BitPointSet, survivors, pairs, covered_by=None):
    """Column sweep in ascending index order over the verified close pairs.

    ``pairs`` is the output of :func:`close_pairs` over the survivors.
    Returns the new centers; ``covered_by`` is updated in place.
    """
    survivors = np.asarray(survivors, dtype=np.int64)
    if covered_by is None:
        covered_by = np.full(X.n, -1, dtype=np.int64)
    if not len(survivors):
        return np.empty(0, dtype=np.int64)
    mem, qry, _ = pairs
    order = np.argsort(qry, kind="stable")
    mem, qry = mem[order], qry[order]
    bounds = np.searchsorted(qry, survivors, side="left"), np.searchsorted(qry, survivors, side="right")
    alive = np.zeros(X.n, dtype=bool)
    alive[survivors] = True
    centers = []
    for idx, q in enumerate(survivors):
        if not alive[q]:
            continue
        centers.append(q)
        alive[q] = False
        covered_by[q] = q
        near = mem[bounds[0][idx]:bounds[1][idx]]
        near = near[alive[near]]
        alive[near] = False
        covered_by[near] = q
    return np.array(centers, dtype=np.int64)


def _restarts(seed: int, body):
    for attempt in range(MAX_RESTARTS + 1):
        try:
            return body(child(seed, attempt)), attempt + 1
        except TooManyCloseEntries as exc:
            log.info("restart %d: %s", attempt + 1, exc)
    raise RetriesExhausted(f"gave up after {MAX_RESTARTS} restarts")


def hamming_rnet(X: BitPointSet, r: float, eps: float, seed: int, backend: str = "sampled",
                 alpha: float = 0.5, members=None, close_limit=None) -> HammingNet:
    """Centers of an approximate r-net with additive error ``eps*k``."""
    _check_params(X, r, eps)
    members = _members(X, members)

    def body(s):
        survivors, partial, covered_by = sparsify(X, r, eps, child(s, 0), members)
        pairs = close_pairs(X, r, eps, child(s, 1), survivors, survivors, backend, alpha, close_limit)
        swept = assemble_net(X, survivors, pairs, covered_by)
        return np.concatenate([partial, swept]), covered_by, len(survivors)

    (centers, covered_by, n_surv), attempts = _restarts(seed, body)
    return HammingNet(centers, covered_by, float(r), float(eps), X.k, attempts,
                      {"survivors": n_surv, "backend": backend})


def delfar_hamming(X: BitPointSet, r: float, eps: float, seed: int, backend: str = "sampled",
                   alpha: float = 0.5, members=None, close_limit=None) -> np.ndarray:
    """Points with a neighbor within ``r`` are kept; points with none within ``r + eps*k`` are dropped.

    A sparsification center enters the output only when its ball over the
    whole input holds another point, so isolated centers are dropped.
    """
    _check_params(X, r, eps)
    members = _members(X, members)
    cut = r + eps * X.k

    def body(s):
        keep = np.zeros(X.n, dtype=bool)
        alive = members.copy()
        rng = generator(child(s, 0), 10)
        for _ in range(math.ceil(math.sqrt(len(members)))):
            if not len(alive):
                break
            c = int(alive[rng.integers(len(alive))])
            dist = hamming_block(X.words[c:c + 1], X.words[members])[0]
            ball = members[(dist <= cut) & (members != c)]
            if len(ball):
                keep[c] = True
                keep[ball[np.isin(ball, alive)]] = True
            alive = alive[(hamming_block(X.words[c:c + 1], X.words[alive])[0] > cut) & (alive != c)]
        mem, qry, _ = close_pairs(X, r, eps, child(s, 1), members, alive, backend, alpha, close_limit)
        keep[qry[mem != qry]] = True
        return keep

    keep, _ = _restarts(seed, body)
    return np.flatnonzero(keep)


def filter_far_hamming(X: BitPointSet, C, r: float, eps: float, seed: int, backend: str = "sampled",
                       alpha: float = 0.5, members=None, close_limit=None) -> np.ndarray:
    """Drop every point within ``r + eps*k`` of some center in ``C``.

    Points within ``r`` of ``C`` never survive; points beyond ``r + eps*k``
    from all of ``C`` always do (up to backend error).
    """
    _check_params(X, r, eps)
    C = np.unique(np.asarray(C, dtype=np.int64))
    if not len(C):
        raise InvalidThreshold("center set must be nonempty")
    members = _members(X, members)
    cut = r + eps * X.k

    def body(s):
        alive = members.copy()
        rng = generator(child(s, 0), 11)
        pending = C.copy()
        for _ in range(math.ceil(math.sqrt(len(members)))):
            if not len(pending) or not len(alive):
                break
            j = rng.integers(len(pending))
            c = int(pending[j])
            pending = np.delete(pending, j)
            dist = hamming_block(X.words[c:c + 1], X.words[alive])[0]
            alive = alive[dist > cut]
        if len(pending) and len(alive):
            _, qry, _ = close_pairs(X, r, eps, child(s, 1), pending, alive, backend, alpha, close_limit)
            alive = alive[~np.isin(alive, qry)]
        return alive

    alive, _ = _restarts(seed, body)
    return alive


def check_separation(X, C, min_sep: float, seed: int = 0, sample: int = EXACT_CHECK_MAX_N) -> None:
    """Raise CentersTooClose if two centers are closer than ``min_sep``.

    Exact for up to ``sample`` centers, otherwise checked on a random sample.
    """
    C = np.asarray(C, dtype=np.int64)
    if len(C) > sample:
        C = np.sort(generator(seed, 12).choice(C, size=sample, replace=False))
    if len(C) < 2:
        return
    D = X.distances(C, C).astype(np.float64)
    np.fill_diagonal(D, np.inf)
    i, j = np.unravel_index(np.argmin(D), D.shape)
    if D[i, j] < min_sep:
        raise CentersTooClose(f"centers {C[i]} and {C[j]} are {D[i, j]:g} apart, need {min_sep:g}")


def cover_assign_hamming(X: BitPointSet, C, r: float, eps: float, seed: int, backend: str = "sampled",
                         alpha: float = 0.5, members=None, check: bool = True, close_limit=None) -> dict:
    """Assign points to the ``r``-balls of well separated centers.

    Every point within ``r`` of ``c`` lands in ``P[c]``; members of ``P[c]``
    are within ``r + eps*k`` of ``c``. A point near several centers goes to
    the nearest one (lowest index on ties), which keeps the sets disjoint.
    """
    _check_params(X, r, eps)
    C = np.unique(np.asarray(C, dtype=np.int64))
    if not len(C):
        raise InvalidThreshold("center set must be nonempty")
    if check:
        check_separation(X, C, 2 * r * (1 + eps), seed)
    members = _members(X, members)

    def body(s):
        return close_pairs(X, r, eps, child(s, 1), C, members, backend, alpha, close_limit)

    (cen, pts, dist), _ = _restarts(seed, body)
    return group_nearest(C, cen, pts, dist)


def group_nearest(C, cen, pts, dist) -> dict:
    """Group verified (center, point, distance) pairs by each point's nearest center."""
    order = np.lexsort((cen, dist, pts))
    cen, pts = cen[order], pts[order]
    first = np.ones(len(pts), dtype=bool)
    first[1:] = pts[1:] != pts[:-1]
    cen, pts = cen[first], pts[first]
    return {int(c): np.sort(pts[cen == c]) for c in C}
