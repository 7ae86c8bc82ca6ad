"""Recompute the frozen reference values in tests/data/oracle_values.json.

Values come from plain double loops and explicit enumeration that share no
code with rnetkit.oracle; the instances come from rnetkit.synth so tests can
rebuild them from their seeds.

    python3 scripts/freeze_oracle_values.py
"""

import itertools
import json
import math
from pathlib import Path

import numpy as np

from rnetkit import synth

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "oracle_values.json"


def dist(p, q, metric):
    if metric == "l1":
        return float(sum(abs(a - b) for a, b in zip(p, q)))
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))


def matrix(pts, metric):
    n = len(pts)
    return [[dist(pts[i], pts[j], metric) for j in range(n)] for i in range(n)]


def spread(D):
    vals = [D[i][j] for i in range(len(D)) for j in range(i + 1, len(D))]
    pos = [v for v in vals if v > 0]
    return max(vals) / min(pos)


def kth_nn(D, k):
    nn = sorted(min(D[i][j] for j in range(len(D)) if j != i) for i in range(len(D)))
    return nn[k - 1]


def kcenter_opt(D, k):
    n = len(D)
    return min(max(min(D[p][c] for c in C) for p in range(n)) for C in itertools.combinations(range(n), k))


def partitions(items):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for p in partitions(rest):
        yield [[head]] + p
        for i in range(len(p)):
            yield p[:i] + [[head] + p[i]] + p[i + 1:]


def minmax_opt(D, m):
    best = math.inf
    for part in partitions(list(range(len(D)))):
        if any(len(b) < m for b in part):
            continue
        cost = max(min(max(D[c][p] for p in b) for c in b) for b in part)
        best = min(best, cost)
    return best


def main():
    out = {}
    X = synth.gaussian(64, 8, 0)
    out["spread_gaussian_64x8_seed0"] = spread(matrix(X.points.tolist(), "l2"))

    knn = {}
    for seed in range(5):
        D = matrix(synth.gaussian(512, 32, seed).points.tolist(), "l2")
        knn[str(seed)] = {str(k): kth_nn(D, k) for k in (1, 3, 10, 256)}
    out["kth_nn_gaussian_512x32"] = knn

    out["kcenter_opt_uniform_14x4_k3"] = {
        str(seed): kcenter_opt(matrix(synth.uniform(14, 4, seed).points.tolist(), "l2"), 3) for seed in range(100)}
    out["kcenter_opt_uniform_12x2_k2"] = {
        str(seed): kcenter_opt(matrix(synth.uniform(12, 2, seed).points.tolist(), "l2"), 2) for seed in range(100)}
    out["minmax_opt_uniform_9x2_minsize2"] = {
        str(seed): minmax_opt(matrix(synth.uniform(9, 2, seed).points.tolist(), "l2"), 2) for seed in range(100)}

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
