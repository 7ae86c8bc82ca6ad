"""Acceptance criteria A1-A10, each at its stated size and tolerance.

Every test records a one-line verdict (see the ``criterion`` fixture);
the lines are printed together at the end of the run.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from rnetkit import apps, embed, hamming_net as hn, oracle, synth
from rnetkit.dataset import save_points
from rnetkit.indicator import block_indicator_matrix, construct_or_ptf
from rnetkit.rnet import _delfar, approx_rnet

pytestmark = pytest.mark.acceptance

SEEDS = range(100)


def _configs():
    """(label, builder, eps) for the three net configurations at both eps values."""
    out = []
    for eps in (0.1, 0.3):
        out.append((f"l2 n=512 d=32 eps={eps}", lambda s: synth.gaussian(512, 32, s, "l2"), eps))
        out.append((f"l1 n=512 d=32 eps={eps}", lambda s: synth.gaussian(512, 32, s, "l1"), eps))
        out.append((f"hamming n=256 k=64 eps={eps}", lambda s: synth.random_bits(256, 64, s), eps))
    return out


def _radius(X):
    # the median pairwise distance, as in the reference example
    if hasattr(X, "words"):
        return float(np.median(X.distances()[np.triu_indices(X.n, 1)]))
    return float(np.median(pdist(X.points, X.metric.scipy_name)))


@pytest.fixture(scope="module")
def net_runs():
    """One approx_rnet per (configuration, seed) with the default randomized backend."""
    runs = {}
    t0 = time.perf_counter()
    for label, build, eps in _configs():
        rows = []
        for seed in SEEDS:
            X = build(seed)
            net = approx_rnet(X, _radius(X), eps, seed)
            rep = oracle.verify_rnet(X, net)
            rows.append((not rep["packing"], not rep["covering"], net.raw["packing"], net.raw["covering"]))
        runs[label] = np.array(rows)
    return runs, time.perf_counter() - t0


def test_a1_packing(net_runs, criterion):
    runs, seconds = net_runs
    packing = {k: int(v[:, 0].sum()) for k, v in runs.items()}
    raw = {k: int(v[:, 2].sum()) for k, v in runs.items()}
    ok = all(p == len(SEEDS) for p in packing.values()) and seconds < 120
    detail = (f"packing pass {min(packing.values())}/100 (min over 6 configs), {seconds:.1f}s total; "
              f"before exact repair: {', '.join(f'{k}: {v}' for k, v in raw.items())}")
    criterion("A1", ok, detail)
    assert ok


def test_a2_covering(net_runs, criterion):
    runs, _ = net_runs
    covering = {k: int(v[:, 1].sum()) for k, v in runs.items()}
    raw = {k: int(v[:, 3].sum()) for k, v in runs.items()}
    exact_ok = 0
    for seed in SEEDS:
        for eps in (0.1, 0.3):
            X = synth.random_bits(256, 64, seed)
            net = hn.hamming_rnet(X, _radius(X), eps, seed, backend="exact")
            exact_ok += oracle.verify_rnet(X, net)["ok"]
    ok = all(c >= 95 for c in covering.values()) and exact_ok == 2 * len(SEEDS)
    detail = (f"randomized min {min(covering.values())}/100 per config, exact Hamming {exact_ok}/200; "
              f"before exact repair: {', '.join(f'{k}: {v}' for k, v in raw.items())}")
    criterion("A2", ok, detail)
    assert ok


def _misclassified(X, F, r, cover):
    D = X.distances().astype(np.float64)
    np.fill_diagonal(D, np.inf)
    nn = D.min(axis=1)
    inF = np.isin(np.arange(X.n), F)
    return int((inF[nn <= r] == False).sum() + inF[nn > cover].sum())  # noqa: E712


def test_a3_delfar(criterion):
    exact_errors = 0
    clean = {"l1": 0, "l2": 0, "hamming sampled": 0}
    raw_clean = {"l1": 0, "l2": 0}
    for seed in SEEDS:
        B = synth.clustered_bits(256, 64, seed, clusters=64, flip=0.06)
        r = float(np.median(oracle.nn_distances(B)))
        F = hn.delfar_hamming(B, r, 0.1, seed, backend="exact")
        exact_errors += _misclassified(B, F, r, r + 0.1 * B.k)
        F = hn.delfar_hamming(B, r, 0.1, seed, backend="sampled")
        clean["hamming sampled"] += _misclassified(B, F, r, r + 0.1 * B.k) == 0
        for metric in ("l1", "l2"):
            X = synth.clustered(256, 8, seed, clusters=40, spread=0.02, metric=metric)
            r = float(np.median(oracle.nn_distances(X)))
            F, raw_errors = _delfar(X, r, 0.2, seed)
            clean[metric] += _misclassified(X, F, r, 1.2 * r) == 0
            raw_clean[metric] += raw_errors == 0
    ok = exact_errors == 0 and all(v >= 95 for v in clean.values())
    detail = (f"exact backend {exact_errors} misclassified; error-free seeds {clean}; "
              f"before exact repair {raw_clean}")
    criterion("A3", ok, detail)
    assert ok


def test_a4_kth_nn(frozen, criterion):
    n, eps = 512, 0.2
    good = {1: 0, 3: 0, n // 2: 0}
    worst = 0.0
    for seed in SEEDS:
        X = synth.gaussian(n, 32, seed)
        nn = np.sort(oracle.nn_distances(X))
        for k in good:
            exact = nn[k - 1]
            if str(seed) in frozen["kth_nn_gaussian_512x32"]:
                assert exact == pytest.approx(frozen["kth_nn_gaussian_512x32"][str(seed)][str(k)], rel=1e-12)
            err = abs(apps.kth_nn_distance(X, k, eps, seed) - exact) / exact
            worst = max(worst, err)
            good[k] += int(err <= eps)
    ok = all(v >= 95 for v in good.values())
    criterion("A4", ok, f"within eps of exact: {good} of 100 seeds; worst relative error {worst:.3f}")
    assert ok


def test_a5_kcenter(frozen, criterion):
    eps = 0.2
    bad4 = bad2 = 0
    worst4 = worst2 = 0.0
    for seed in SEEDS:
        if seed % 2:
            X, k, opt = synth.uniform(14, 4, seed), 3, frozen["kcenter_opt_uniform_14x4_k3"][str(seed)]
        else:
            X, k, opt = synth.uniform(12, 2, seed), 2, frozen["kcenter_opt_uniform_12x2_k2"][str(seed)]
        assert oracle.exact_kcenter(X, k)[1] == pytest.approx(opt, rel=1e-12)
        r4 = apps.kcenter_4eps(X, k, eps, seed).radius / opt
        r2 = apps.kcenter_2eps(X, k, eps, seed).radius / opt
        worst4, worst2 = max(worst4, r4), max(worst2, r2)
        bad4 += r4 > 4 + eps
        bad2 += r2 > 2 + eps
    large = []
    for seed in range(3):
        X = synth.gaussian(512, 8, seed)
        large.append(apps.kcenter_4eps(X, 5, eps, seed).radius / oracle.gonzalez_radius(X, 5))
    ok = bad4 == 0 and bad2 == 0 and max(large) <= 4 + eps
    criterion("A5", ok, f"worst ratio 4eps-route {worst4:.3f}, 2eps-route {worst2:.3f} over 100 instances; "
                        f"n=512 radius/Gonzalez max {max(large):.3f}")
    assert ok


def test_a6_greedy(criterion):
    eps = 0.2
    good = 0
    for seed in SEEDS:
        X = synth.gaussian(256, 8, seed)
        good += oracle.verify_greedy(X, apps.greedy_permutation(X, eps, seed), eps)["ok"]
    ok = good >= 95
    criterion("A6", ok, f"{good}/100 permutations pass both prefix bands exhaustively")
    assert ok


def test_a7_minmax(frozen, criterion):
    eps = 0.2
    F = apps.MinSize(2)
    valid = within = 0
    worst = 0.0
    for seed in SEEDS:
        if seed % 2:
            X = synth.uniform(10, 2, seed)
            opt = oracle.exact_minmax(X, F)
        else:
            X = synth.uniform(9, 2, seed)
            opt = frozen["minmax_opt_uniform_9x2_minsize2"][str(seed)]
        try:
            cl = apps.minmax_cluster(X, F, eps, seed)
        except Exception:
            continue
        if not all(apps.member(F, np.flatnonzero(cl.assignment == c)) for c in cl.centers):
            continue
        valid += 1
        worst = max(worst, cl.radius / opt)
        within += cl.radius <= (4 + eps) * opt * (1 + 1e-12)
    ok = valid >= 95 and within == valid
    criterion("A7", ok, f"{valid}/100 valid runs, {within}/{valid} within (4+eps) OPT; worst ratio {worst:.3f}")
    assert ok


def test_a8_threshold_polynomials(criterion):
    rng = np.random.default_rng(8)
    true_hits = false_hits = 0
    for seed in range(1000):
        P = construct_or_ptf(2, 8, 4, 0.25, seed)
        x = np.zeros((2, 8), dtype=np.int64)
        x[0] = 1
        x[1, rng.choice(8, size=rng.integers(9), replace=False)] = 1
        true_hits += P(x) > 4
        y = np.zeros((2, 8), dtype=np.int64)
        for i in range(2):
            y[i, rng.choice(8, size=rng.integers(4), replace=False)] = 1
        false_hits += abs(P(y)) <= 2
    need = 2 / 3 - 0.03
    errors = {}
    for backend, k, r, eps in (("ptf", 32, 8, 0.25), ("sampled", 1024, 128, 0.3)):
        wrong = total = 0
        seed = 0
        while total < 10 ** 4:
            flip = 0.12 if k == 32 else 0.05
            X = synth.clustered_bits(128, k, seed, clusters=8, flip=flip)
            M = block_indicator_matrix(X, r, eps, backend=backend, seed=seed)
            D = X.distances()
            dmin = np.array([D[cell].min(axis=0) for cell in M.partition])
            sure = (dmin <= r) | (dmin > r + eps * k)
            wrong += int((M.close()[sure] != (dmin[sure] <= r)).sum())
            total += int(sure.sum())
            seed += 1
        errors[backend] = (wrong, total)
    ok = (true_hits / 1000 >= need and false_hits / 1000 >= need
          and all(w / t <= 0.001 for w, t in errors.values()))
    detail = (f"true side {true_hits}/1000, false side {false_hits}/1000 (need {need:.3f}); "
              + ", ".join(f"{b} entry errors {w}/{t}" for b, (w, t) in errors.items()))
    criterion("A8", ok, detail)
    assert ok


def test_a9_embeddings(criterion):
    eps = 0.2
    good = 0
    worst = 1.0
    for seed in SEEDS:
        X = synth.gaussian(256, 32, seed)
        Y = embed.l2_to_l1(X, eps, seed)
        ratio = pdist(Y.points, "cityblock") / pdist(X.points)
        frac = float(np.mean(np.abs(ratio - 1) <= eps))
        worst = min(worst, frac)
        good += frac >= 0.99
    bad = pairs = 0
    per_instance = []
    for seed in SEEDS:
        X = synth.gaussian(256, 32, seed, "l1")
        bits, fam = embed.l1_to_hamming(X, _radius(X), eps, seed)
        v = embed.separation_violations(X, bits, fam)
        n_pairs = v["near_pairs"] + v["far_pairs"]
        bad += v["combined"] * n_pairs
        pairs += n_pairs
        per_instance.append(v["combined"])
    rate = bad / pairs
    ok = good >= 99 and rate <= 0.05
    criterion("A9", ok, f"l2->l1: {good}/100 seeds keep >= 99% of pairs (worst {worst:.4f}); "
                        f"l1->Hamming violations {rate:.4f} of pairs pooled, per-instance median "
                        f"{np.median(per_instance):.4f}, max {max(per_instance):.4f}")
    assert ok


def _cli(argv, threads):
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    res = subprocess.run([sys.executable, "-m", "rnetkit", *argv, "--threads", str(threads)],
                         capture_output=True, env=env)
    assert res.returncode == 0, res.stderr.decode()
    return res.stdout


def test_a10_determinism(tmp_path, criterion):
    g = tmp_path / "g.bin"
    save_points(synth.gaussian(200, 8, 1), g)
    l1 = tmp_path / "l1.bin"
    save_points(synth.gaussian(200, 8, 2, "l1"), l1)
    h = tmp_path / "h.bin"
    save_points(synth.clustered_bits(200, 64, 3, flip=0.1), h)
    small = tmp_path / "s.bin"
    save_points(synth.uniform(9, 2, 4), small)
    commands = [
        ["rnet", "build", "--r", "1.5", "--eps", "0.2", str(g)],
        ["rnet", "build", "--r", "4", "--eps", "0.2", str(l1)],
        ["rnet", "build", "--r", "8", "--eps", "0.1", "--backend", "exact", str(h)],
        ["delfar", "--r", "1.0", "--eps", "0.2", str(g)],
        ["knn-dist", "--k", "5", "--eps", "0.2", str(g)],
        ["kcenter", "--k", "4", "--mode", "decider", str(g)],
        ["kcenter", "--k", "4", "--mode", "greedy", str(g)],
        ["minmax", "--family", "minsize:2", str(small)],
        ["greedy-perm", "--eps", "0.2", str(l1)],
        ["rnet", "build", "--r", "6", "--eps", "0.2", str(h)],
    ]
    same = 0
    combos = 0
    for argv in commands:
        for seed in (11, 12):
            full = argv[:-1] + ["--seed", str(seed), argv[-1]]
            combos += 1
            same += _cli(full, 1) == _cli(full, 4)
    ok = same == combos == 20
    criterion("A10", ok, f"{same}/{combos} command/seed combinations byte-identical at --threads 1 and 4")
    assert ok
