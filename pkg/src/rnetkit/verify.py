"""Exact net verification in the original metric, and the repair pass built on it."""

from __future__ import annotations

import numpy as np

from .dataset import BitPointSet, Metric
from .seeding import generator

EXACT_VERIFY_MAX_N = 4096
SPOT_FRACTION = 0.01
_CHUNK = 1024


def _nearest(X, rows, centers):
    """Distance to, and position in ``centers`` of, the nearest center for each row."""
    best = np.full(len(rows), np.inf)
    arg = np.zeros(len(rows), dtype=np.int64)
    for s in range(0, len(rows), _CHUNK):
        D = X.distances(rows[s:s + _CHUNK], centers).astype(np.float64)
        arg[s:s + _CHUNK] = D.argmin(axis=1)
        best[s:s + _CHUNK] = D[np.arange(len(D)), arg[s:s + _CHUNK]]
    return best, arg


def packing_ok(X, centers, pack_r: float) -> bool:
    centers = np.asarray(centers, dtype=np.int64)
    if len(centers) < 2:
        return True
    D = X.distances(centers, centers).astype(np.float64)
    np.fill_diagonal(D, np.inf)
    return bool(D.min() >= pack_r and D.min() > 0)


def verify_assignment(X, members, centers, assignment, pack_r: float, cover_r: float, seed: int = 0) -> dict:
    """Packing among ``centers`` and covering of ``members`` by their assigned centers.

    Covering is exact up to EXACT_VERIFY_MAX_N members and spot-checked on a
    1% sample beyond that.
    """
    members = np.asarray(members, dtype=np.int64)
    checked = "exact"
    rows = members
    if len(members) > EXACT_VERIFY_MAX_N:
        checked = "sampled"
        size = max(1, int(len(members) * SPOT_FRACTION))
        rows = np.sort(generator(seed, 30).choice(members, size=size, replace=False))
    a = np.asarray(assignment)[rows]
    covering = bool(np.all(a >= 0))
    if covering and len(rows):
        covering = bool(np.all(_paired(X, rows, a) <= cover_r))
    return {"packing": packing_ok(X, centers, pack_r), "covering": covering, "checked": checked}


def _paired(X, rows, cols) -> np.ndarray:
    """Distances between rows[i] and cols[i]."""
    if isinstance(X, BitPointSet):
        return np.bitwise_count(X.words[rows] ^ X.words[cols]).sum(axis=1).astype(np.float64)
    diff = X.points[rows] - X.points[cols]
    if X.metric is Metric.L1:
        return np.abs(diff).sum(axis=1)
    return np.sqrt((diff ** 2).sum(axis=1))


def repair_packing(X, centers, pack_r: float):
    """Keep centers in order, demoting any closer than ``pack_r`` (or coincident) to an earlier kept one."""
    centers = np.asarray(centers, dtype=np.int64)
    if len(centers) < 2:
        return centers, 0
    D = X.distances(centers, centers).astype(np.float64)
    keep = np.zeros(len(centers), dtype=bool)
    for i in range(len(centers)):
        row = D[i, keep]
        keep[i] = not len(row) or (row.min() >= pack_r and row.min() > 0)
    return centers[keep], int((~keep).sum())


def repair_net(X, members, centers, pack_r: float, cover_r: float):
    """Exact repair: enforce packing, then promote uncovered members in index order.

    Returns ``(centers, assignment, repairs)``; ``assignment`` maps every
    member to its nearest center (lowest center position on ties) and is -1
    elsewhere.
    """
    members = np.asarray(members, dtype=np.int64)
    centers, repairs = repair_packing(X, centers, pack_r)
    centers = list(centers)
    if not centers and len(members):
        centers = [int(members[0])]
        repairs += 1
    best, _ = _nearest(X, members, np.array(centers))
    for idx in np.flatnonzero(best > cover_r):
        p = members[idx]
        # an earlier promotion may already cover this point
        if X.distances([p], centers).min() > cover_r:
            centers.append(int(p))
            repairs += 1
    centers = np.array(centers, dtype=np.int64)
    _, arg = _nearest(X, members, centers)
    assignment = np.full(X.n, -1, dtype=np.int64)
    assignment[members] = centers[arg]
    return centers, assignment, repairs
