import numpy as np
import pytest
from hypothesis import given, strategies as st

from rnetkit import oracle, synth
from rnetkit.apps import MinSize
from rnetkit.errors import ScaleExceeded
from rnetkit.rnet import RNet
from rnetkit.dataset import Metric


def _net(centers, assignment, r, eps=0.2):
    return RNet(np.array(centers), np.array(assignment), r, eps, Metric.L1)


def test_verify_rnet_valid():
    X = synth.line([0, 10, 20])
    assert oracle.verify_rnet(X, _net([0, 1, 2], [0, 1, 2], 5))["ok"]


def test_verify_rnet_packing_violation():
    X = synth.line([0, 4, 20])
    rep = oracle.verify_rnet(X, _net([0, 1, 2], [0, 1, 2], 5))
    assert rep["packing"] == [(0, 1, 4.0)] and not rep["ok"]


def test_verify_rnet_covering_violation():
    X = synth.line([0, 7, 20])
    rep = oracle.verify_rnet(X, _net([0, 2], [0, 0, 2], 5))
    assert rep["covering"] == [(1, 0, 7.0)]


def test_kth_nn_line():
    assert oracle.exact_kth_nn(synth.line([0, 1, 3, 7]), 3) == 2


def test_kth_nn_frozen(frozen):
    for seed, vals in frozen["kth_nn_gaussian_512x32"].items():
        X = synth.gaussian(512, 32, int(seed))
        for k, v in vals.items():
            assert oracle.exact_kth_nn(X, int(k)) == pytest.approx(v, rel=1e-12)


def test_kcenter_line():
    centers, opt = oracle.exact_kcenter(synth.line([0, 1, 10]), 2)
    assert opt == 1


def test_kcenter_frozen(frozen):
    for seed in range(0, 100, 10):
        _, opt = oracle.exact_kcenter(synth.uniform(14, 4, seed), 3)
        assert opt == pytest.approx(frozen["kcenter_opt_uniform_14x4_k3"][str(seed)], rel=1e-12)


def test_kcenter_cap():
    with pytest.raises(ScaleExceeded):
        oracle.exact_kcenter(synth.uniform(17, 2, 0), 2)


def test_greedy_line():
    order, radii = oracle.exact_greedy_perm(synth.line([0, 1, 10]), 0)
    assert order.tolist() == [0, 2, 1]
    assert radii.tolist() == [10, 1]


@given(st.integers(0, 10 ** 6), st.integers(2, 40))
def test_greedy_radii_nonincreasing_and_farthest(seed, n):
    X = synth.uniform(n, 3, seed)
    order, radii = oracle.exact_greedy_perm(X, 0)
    assert np.all(np.diff(radii) <= 1e-12)
    D = X.distances()
    for i in range(1, n):
        # the i-th point is exactly the farthest from the prefix
        assert D[order[:i]].min(axis=0).max() == pytest.approx(radii[i - 1])
        assert D[order[:i], order[i]].min() == pytest.approx(radii[i - 1])


def test_min_distance_set():
    rep = oracle.exact_min_distance_set(synth.line([0, 1, 5, 9]), [0], 1.5)
    assert rep["within"].tolist() == [0, 1]
    assert rep["beyond"].tolist() == [2, 3]


def test_minmax_line():
    assert oracle.exact_minmax(synth.line([0, 1, 10, 11]), MinSize(2)) == 1


def test_minmax_frozen(frozen):
    for seed in range(0, 100, 10):
        got = oracle.exact_minmax(synth.uniform(9, 2, seed), MinSize(2))
        assert got == pytest.approx(frozen["minmax_opt_uniform_9x2_minsize2"][str(seed)], rel=1e-12)


def test_rmin_single_cluster():
    assert oracle.rmin(synth.line([0, 1, 10]), [0, 1, 2]) == 9


def test_verify_greedy_exact_order_passes():
    X = synth.uniform(30, 2, 4)

    class P:
        order, radii = oracle.exact_greedy_perm(X, 0)

    assert oracle.verify_greedy(X, P, 0.0)["ok"]


def test_oracles_are_deterministic():
    X = synth.uniform(12, 3, 9)
    assert oracle.exact_kcenter(X, 2)[1] == oracle.exact_kcenter(X, 2)[1]
    assert np.array_equal(oracle.exact_greedy_perm(X, 3)[0], oracle.exact_greedy_perm(X, 3)[0])
