"""Approximate r-nets in Hamming, l1 and l2 space, and clustering applications built on them."""

from .apps import (
    All,
    Clustering,
    GreedyPermutation,
    MinSize,
    greedy_permutation,
    kcenter_2eps,
    kcenter_4eps,
    kth_nn_distance,
    minmax_cluster,
    parse_family,
    register_family,
)
from .dataset import BitPointSet, Metric, PointSet, load_points, save_points, spread
from .embed import l1_to_hamming, l2_to_l1
from .hamming_net import HammingNet, delfar_hamming, filter_far_hamming, hamming_rnet
from .indicator import IndicatorMatrix, OrPtf, block_indicator_matrix, construct_or_ptf
from .netprune import Above, Below, Interval, netprune_search, refine_interval
from .rnet import RNet, approx_rnet, cover_assign, delfar, filter_far

__version__ = "0.1.0"
