import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rnetkit import apps, oracle, synth
from rnetkit.errors import AllPointsIdentical, InfeasibleFamily, KOutOfRange
from rnetkit.seeding import generator

EPS = 0.2


def start_at_zero_seed(n):
    """A seed whose greedy permutation starts at point 0."""
    return next(s for s in range(1000) if generator(s, 80).integers(n) == 0)


def test_kth_nn_line():
    v = apps.kth_nn_distance(synth.line([0, 1, 3, 7]), 3, EPS, 0)
    assert 2 / (1 + EPS) <= v <= 2 * (1 + EPS)


def test_kth_nn_outlier_is_max():
    X = synth.line([0, 1, 2, 3, 4, 100])
    v = apps.kth_nn_distance(X, 6, EPS, 1)
    assert 96 <= v <= 96 * (1 + EPS)


def test_kth_nn_duplicates_give_zero():
    assert apps.kth_nn_distance(synth.line([0, 0, 5, 9]), 2, EPS, 0) == 0.0


def test_kth_nn_frozen(frozen):
    for seed, vals in frozen["kth_nn_gaussian_512x32"].items():
        X = synth.gaussian(512, 32, int(seed))
        exact = vals["10"]
        assert abs(apps.kth_nn_distance(X, 10, EPS, int(seed)) - exact) <= EPS * exact


def test_kth_nn_k_out_of_range():
    with pytest.raises(KOutOfRange):
        apps.kth_nn_distance(synth.line([0, 1, 2]), 4, EPS, 0)


def test_kcenter_k_equals_n():
    X = synth.uniform(7, 2, 0)
    for f in (apps.kcenter_4eps, apps.kcenter_2eps):
        cl = f(X, 7, EPS, 0)
        assert cl.radius == 0 and sorted(cl.centers.tolist()) == list(range(7))


def test_kcenter_line():
    X = synth.line([0, 1, 10])
    assert apps.kcenter_4eps(X, 2, EPS, 0).radius <= 4 + EPS
    cl = apps.kcenter_2eps(X, 2, EPS, start_at_zero_seed(3))
    assert sorted(cl.centers.tolist()) == [0, 2] and cl.radius == 1


def test_kcenter_ratios_against_frozen(frozen):
    opts = frozen["kcenter_opt_uniform_14x4_k3"]
    for seed in range(20):
        X = synth.uniform(14, 4, seed)
        opt = opts[str(seed)]
        assert apps.kcenter_4eps(X, 3, EPS, seed).radius <= (4 + EPS) * opt * (1 + 1e-12)
        assert apps.kcenter_2eps(X, 3, EPS, seed).radius <= (2 + EPS) * opt * (1 + 1e-12)


@given(st.integers(0, 2 ** 32), st.integers(5, 60), st.integers(1, 5), st.sampled_from(["l1", "l2"]))
def test_reported_radius_is_exact(seed, n, k, metric):
    X = synth.clustered(n, 2, seed, clusters=4, spread=0.03, metric=metric)
    for cl in (apps.kcenter_4eps(X, k, EPS, seed), apps.kcenter_2eps(X, k, EPS, seed)):
        assert len(cl.centers) <= k
        assert cl.radius == pytest.approx(apps.assigned_radius(X, cl.assignment), abs=1e-12)
        assert np.isin(cl.assignment, cl.centers).all()


def test_greedy_line():
    X = synth.line([0, 1, 10])
    perm = apps.greedy_permutation(X, EPS, start_at_zero_seed(3))
    assert perm.order.tolist() == [0, 2, 1]
    assert perm.radii[0] == 10
    assert oracle.verify_greedy(X, perm, EPS)["ok"]


def test_greedy_two_points():
    perm = apps.greedy_permutation(synth.line([3, 7]), 0.5, 2)
    assert sorted(perm.order.tolist()) == [0, 1] and perm.radii.tolist() == [4]


def test_greedy_identical_points():
    with pytest.raises(AllPointsIdentical):
        apps.greedy_permutation(synth.line([2, 2]), EPS, 0)


@pytest.mark.parametrize("seed", range(5))
def test_greedy_bands_gaussian(seed):
    X = synth.gaussian(256, 8, seed)
    perm = apps.greedy_permutation(X, EPS, seed, diagnostics=True)
    assert oracle.verify_greedy(X, perm, EPS)["ok"]
    assert np.all(np.diff(perm.radii) <= 0)
    assert perm.rounds <= perm.round_bound


@given(st.integers(0, 2 ** 32), st.integers(2, 40), st.floats(0.05, 0.9))
def test_greedy_bands_property(seed, n, eps):
    X = synth.clustered(n, 2, seed, clusters=5, spread=0.02)
    perm = apps.greedy_permutation(X, eps, seed)
    assert sorted(perm.order.tolist()) == list(range(n))
    assert oracle.verify_greedy(X, perm, eps)["ok"]


def test_schedule_ratio():
    e = apps.schedule_ratio(0.2)
    assert 2 * (1 + e) ** 2 == pytest.approx(2 + 0.2)


def test_minmax_all_family_singletons():
    cl = apps.minmax_cluster(synth.uniform(6, 2, 0), apps.All(), EPS, 0)
    assert cl.radius == 0 and len(cl.centers) == 6


def test_minmax_pairs_line():
    cl = apps.minmax_cluster(synth.line([0, 1, 10, 11]), apps.MinSize(2), EPS, 0)
    assert cl.radius <= 4 + EPS


def test_minmax_single_cluster():
    X = synth.uniform(8, 2, 4)
    cl = apps.minmax_cluster(X, apps.MinSize(8), EPS, 0)
    assert cl.radius <= (4 + EPS) * oracle.rmin(X, np.arange(8))


def test_minmax_against_frozen(frozen):
    opts = frozen["minmax_opt_uniform_9x2_minsize2"]
    F = apps.MinSize(2)
    for seed in range(20):
        X = synth.uniform(9, 2, seed)
        cl = apps.minmax_cluster(X, F, EPS, seed)
        assert cl.radius <= (4 + EPS) * opts[str(seed)] * (1 + 1e-12)
        for c in cl.centers:
            assert apps.member(F, np.flatnonzero(cl.assignment == c))


@settings(max_examples=10)
@given(st.integers(0, 2 ** 32), st.integers(4, 40), st.integers(2, 4))
def test_minmax_partition_property(seed, n, m):
    X = synth.clustered(n, 2, seed, clusters=3, spread=0.05)
    F = apps.MinSize(m)
    cl = apps.minmax_cluster(X, F, EPS, seed)
    assert np.isin(cl.assignment, cl.centers).all()  # every point in exactly one cluster
    assert all(apps.member(F, np.flatnonzero(cl.assignment == c)) for c in cl.centers)
    assert cl.radius == pytest.approx(apps.assigned_radius(X, cl.assignment))


def test_minmax_infeasible():
    with pytest.raises(InfeasibleFamily):
        apps.minmax_cluster(synth.line([0, 1]), apps.MinSize(3), EPS, 0)


def test_family_parsing_and_registry():
    assert apps.parse_family("minsize:3") == apps.MinSize(3)
    apps.register_family("has-even", lambda: HasEvenIndex())
    F = apps.parse_family("has-even")
    assert apps.member(F, [1, 2]) and not apps.member(F, [1, 3])
    with pytest.raises(ValueError):
        apps.parse_family("nosuch:1")


class HasEvenIndex:
    """Upward closed: sets holding at least one even point index."""

    def sketch(self, i):
        return i % 2 == 0

    def merge(self, a, b):
        return a or b

    def orac(self, s):
        return bool(s)
