"""Exhaustive reference computations. Deterministic, seed-free and slow by design."""

from __future__ import annotations

import itertools

import numpy as np

from .errors import ScaleExceeded

MAX_N = 8192
KCENTER_MAX_N = 16
MINMAX_MAX_N = 10


def _cap(X, limit: int, what: str) -> None:
    if X.n > limit:
        raise ScaleExceeded(f"{what} is capped at n <= {limit}, got n = {X.n}")


def _all_distances(X) -> np.ndarray:
    _cap(X, MAX_N, "exhaustive distances")
    return X.distances().astype(np.float64)


def verify_rnet(X, net) -> dict:
    """Packing and covering check of a net (RNet or HammingNet) with exact distances.

    Points outside the net's input subset (assignment -1) are ignored.
    """
    centers = np.asarray(net.centers, dtype=np.int64)
    assignment = np.asarray(net.assignment if hasattr(net, "assignment") else net.covered_by)
    pack_r, cover_r = net.r, net.cover_radius
    packing = []
    if len(centers) > 1:
        D = X.distances(centers, centers).astype(np.float64)
        i, j = np.nonzero(np.triu((D < pack_r) | (D == 0), 1))
        packing = [(int(centers[a]), int(centers[b]), float(D[a, b])) for a, b in zip(i, j)]
    covering = []
    for p in np.flatnonzero(assignment >= 0):
        d = float(X.distances([p], [assignment[p]])[0, 0])
        if d > cover_r:
            covering.append((int(p), int(assignment[p]), d))
    return {"packing": packing, "covering": covering, "ok": not packing and not covering}


def nn_distances(X) -> np.ndarray:
    D = _all_distances(X)
    np.fill_diagonal(D, np.inf)
    return D.min(axis=1)


def exact_kth_nn(X, k: int) -> float:
    """k-th smallest of the n nearest-neighbor distances."""
    if X.n < 2 or not 1 <= k <= X.n:
        raise ValueError("need n >= 2 and 1 <= k <= n")
    return float(np.sort(nn_distances(X))[k - 1])


def exact_kcenter(X, k: int):
    """Optimal k-center with centers restricted to data points, by enumerating all center subsets."""
    _cap(X, KCENTER_MAX_N, "exact_kcenter")
    if not 1 <= k <= X.n:
        raise ValueError("need 1 <= k <= n")
    D = _all_distances(X)
    best, arg = np.inf, None
    for C in itertools.combinations(range(X.n), k):
        r = D[:, C].min(axis=1).max()
        if r < best:
            best, arg = r, C
    return np.array(arg), float(best)


def exact_greedy_perm(X, start: int = 0):
    """Farthest-first traversal; radii[i-1] is the largest distance to the first i points."""
    D = _all_distances(X)
    order = [start]
    to_s = D[start].copy()
    radii = []
    for _ in range(X.n - 1):
        nxt = int(np.argmax(to_s))  # lowest index among ties
        radii.append(float(to_s[nxt]))
        order.append(nxt)
        to_s = np.minimum(to_s, D[nxt])
    return np.array(order), np.array(radii)


def gonzalez_radius(X, k: int, start: int = 0) -> float:
    """k-center radius of the first k points of the farthest-first traversal (at most twice optimal)."""
    order, radii = exact_greedy_perm(X, start)
    return float(radii[k - 1]) if k < X.n else 0.0


def exact_min_distance_set(X, C, r: float) -> dict:
    """Distance from every point to the set C, and which points lie within r of it."""
    _cap(X, MAX_N, "exact_min_distance_set")
    C = np.asarray(C, dtype=np.int64)
    dmin = X.distances(None, C).astype(np.float64).min(axis=1)
    return {"distance": dmin, "within": np.flatnonzero(dmin <= r), "beyond": np.flatnonzero(dmin > r)}


def rmin(X, pts) -> float:
    """Smallest radius of a ball centered at a member of ``pts`` that holds all of them."""
    pts = np.asarray(pts, dtype=np.int64)
    return float(X.distances(pts, pts).max(axis=1).min())


def exact_minmax(X, F) -> float:
    """Optimal Min-Max cost over partitions into family members, by subset dynamic programming."""
    _cap(X, MINMAX_MAX_N, "exact_minmax")
    from .apps import member

    n = X.n
    D = _all_distances(X)
    full = (1 << n) - 1
    cost = np.full(full + 1, np.inf)
    for mask in range(1, full + 1):
        pts = [i for i in range(n) if mask >> i & 1]
        if member(F, pts):
            cost[mask] = D[np.ix_(pts, pts)].max(axis=1).min()
    best = np.full(full + 1, np.inf)
    best[0] = 0.0
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        sub = rest
        # every part containing the lowest point, combined with an optimal split of the remainder
        while True:
            part = sub | low
            v = max(cost[part], best[mask ^ part])
            if v < best[mask]:
                best[mask] = v
            if sub == 0:
                break
            sub = (sub - 1) & rest
    return float(best[full])


def verify_greedy(X, perm, eps: float) -> dict:
    """Check the prefix bands of a greedy permutation exhaustively.

    For every prefix length i: the largest distance of a point to the
    prefix lies in [r_i, (1+eps) r_i], and prefix points are pairwise at
    least r_i apart.
    """
    D = _all_distances(X)
    order = np.asarray(perm.order)
    radii = np.asarray(perm.radii, dtype=np.float64)
    to_s = D[order[0]].copy()
    min_pair = np.inf
    bad_cover, bad_pack = [], []
    tol = 1e-9
    for i in range(1, X.n):
        r = radii[i - 1]
        far = float(to_s.max())
        if not (r * (1 - tol) <= far <= (1 + eps) * r * (1 + tol) + tol):
            bad_cover.append((i, far, float(r)))
        if min_pair < r * (1 - tol):
            bad_pack.append((i, float(min_pair), float(r)))
        nxt = order[i]
        min_pair = min(min_pair, float(D[nxt, order[:i]].min()))
        to_s = np.minimum(to_s, D[nxt])
    if len(set(order.tolist())) != X.n:
        bad_cover.append((-1, 0.0, 0.0))
    return {"covering": bad_cover, "packing": bad_pack, "ok": not bad_cover and not bad_pack}
