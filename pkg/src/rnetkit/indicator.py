"""Cell-vs-point indicator matrices over Hamming data.

A random partition S_1..S_m of the member points is drawn, and for every
cell i and query point q_j an entry W[i, j] is produced with

    min_{p in S_i} dist(p, q_j) <= r          =>  W[i, j] > 2 |S_i|
    min_{p in S_i} dist(p, q_j) >  r + eps*k  =>  |W[i, j]| <= |S_i|

Three interchangeable backends fill W: ``exact`` (direct minimum
distances), ``sampled`` (coordinate-sampled distance estimates with
majority amplification) and ``ptf`` (sampled threshold polynomials
evaluated as inner products of split feature vectors).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev

from .dataset import BitPointSet, hamming_block
from .errors import InvalidAlpha, InvalidThreshold, ScaleExceeded
from .seeding import generator

log = logging.getLogger(__name__)

# Constants behind the O() forms: degree factor, samples factor, repetitions factor.
C1 = 2.0
C2 = 8.0
C3 = 10.0

PTF_MAX_DISJUNCTS = 16
PTF_MAX_DIM = 32
PTF_MAX_FEATURES = 200_000

BACKENDS = ("exact", "sampled", "ptf")

_TOL = 1e-9


def degree_bound(s: int, eps: float) -> int:
    return math.ceil(C1 * (1.0 / eps) ** (1.0 / 3.0) * math.log(s + 1))


def _ceil(v: float) -> int:
    return math.ceil(v - _TOL)


def _floor(v: float) -> int:
    return math.floor(v + _TOL)


@dataclass(frozen=True)
class OrPtf:
    """One polynomial drawn from the threshold-OR distribution.

    The same univariate profile ``T`` is applied to every disjunct:
    ``P(x) = sum_i T(sum_{l in coords} x[i, l])``. Two equivalent
    multilinear expansions are kept, one over the 0/1 inputs
    (``x_coeffs[j]`` multiplies every degree-j monomial) and one over
    +-1 agreement variables (``u_coeffs``), which is what splits into
    per-point feature vectors.
    """

    s: int
    dim: int
    t: float
    eps: float
    degree: int
    degree_bound: int
    coords: np.ndarray
    profile: np.ndarray
    x_coeffs: np.ndarray
    u_coeffs: np.ndarray

    @property
    def m(self) -> int:
        return len(self.coords)

    @property
    def monomial_count(self) -> int:
        return self.s * sum(math.comb(self.m, j) for j in range(self.degree + 1))

    def monomials(self):
        """Yield ``(coefficient, variable indices)``; variable (i, l) has index i*dim + l."""
        for i in range(self.s):
            base = i * self.dim
            for j in range(self.degree + 1):
                c = float(self.x_coeffs[j])
                for sub in itertools.combinations(self.coords.tolist(), j):
                    yield c, tuple(base + l for l in sub)

    def disjunct_values(self, x) -> np.ndarray:
        x = np.asarray(x).reshape(-1, self.dim)
        y = x[:, self.coords].sum(axis=1).astype(np.int64)
        return self.profile[y]

    def __call__(self, x) -> float:
        return float(self.disjunct_values(x).sum())

    def evaluate_monomials(self, x) -> float:
        """Evaluate by summing the expanded monomials (slow, for verification)."""
        flat = np.asarray(x).reshape(-1)
        total = 0.0
        for c, vars_ in self.monomials():
            if all(flat[v] for v in vars_):
                total += c
        return total

    # -- split evaluation ------------------------------------------------
    def subsets(self):
        return [np.array(list(itertools.combinations(range(self.m), j)), dtype=np.int64).reshape(math.comb(self.m, j), j)
                for j in range(self.degree + 1)]

    def features(self, signs: np.ndarray, weighted: bool) -> np.ndarray:
        """Character features chi_S(sigma) for all |S| <= degree.

        ``signs`` is an (n, m) +-1 array restricted to ``coords``. With
        ``weighted`` each block is scaled by its coefficient, so that
        ``features(a, True) @ features(b, False).T`` equals the profile
        evaluated at the agreement count of every pair.
        """
        blocks = []
        for j, sub in enumerate(self.subsets()):
            if j == 0:
                f = np.ones((signs.shape[0], 1))
            else:
                f = np.prod(signs[:, sub], axis=2)
            blocks.append(f * self.u_coeffs[j] if weighted else f)
        return np.hstack(blocks)


def _krawtchouk(m: int, j: int, y: int) -> int:
    return sum((-1) ** i * math.comb(m - y, i) * math.comb(y, j - i) for i in range(j + 1))


def _profile_coefficients(profile: np.ndarray, degree: int):
    m = len(profile) - 1
    # forward differences at 0 give the elementary-symmetric expansion in 0/1 variables
    diffs = np.array(profile[: degree + 1], dtype=np.float64)
    x_coeffs = np.empty(degree + 1)
    for j in range(degree + 1):
        x_coeffs[j] = diffs[0]
        diffs = np.diff(diffs)
    # Krawtchouk projection gives the expansion in +-1 agreement variables
    weights = np.array([math.comb(m, y) for y in range(m + 1)], dtype=np.float64)
    u_coeffs = np.empty(degree + 1)
    for j in range(degree + 1):
        kj = np.array([_krawtchouk(m, j, y) for y in range(m + 1)], dtype=np.float64)
        u_coeffs[j] = (weights * profile * kj).sum() / (2.0 ** m * math.comb(m, j))
    return x_coeffs, u_coeffs


def construct_or_ptf(s: int, dim: int, t: float, eps: float, seed: int) -> OrPtf:
    """Sample a polynomial for OR_i [sum_j x_ij >= t] with slack eps*dim.

    False instances evaluate to |P| <= s and instances with a disjunct
    reaching t + eps*dim evaluate above 2s, each with probability >= 2/3.
    Each disjunct is a Chebyshev polynomial of the (sampled) coordinate
    sum, scaled so the false region maps into [-1, 1].
    """
    if s < 1 or dim < 1:
        raise InvalidThreshold("need s >= 1 and dim >= 1")
    if not 0 < eps < 1:
        raise InvalidThreshold(f"eps must lie in (0, 1), got {eps}")
    if t < 0:
        raise InvalidThreshold(f"threshold must be non-negative, got {t}")
    if s > PTF_MAX_DISJUNCTS or dim > PTF_MAX_DIM:
        raise ScaleExceeded(f"(s={s}, dim={dim}) outside the evaluable envelope "
                            f"(s <= {PTF_MAX_DISJUNCTS}, dim <= {PTF_MAX_DIM})")

    rng = generator(seed)
    bound = degree_bound(s, eps)
    m = min(dim, math.ceil(C2 * eps ** -2 * math.log(3 * s)))
    coords = np.sort(rng.choice(dim, size=m, replace=False)) if m < dim else np.arange(dim)
    scale = m / dim
    if m == dim:
        y_false = _ceil(t) - 1
        y_true = _ceil(t + eps * dim)
    else:
        y_false = _floor((t + eps * dim / 4) * scale)
        y_true = _ceil((t + 3 * eps * dim / 4) * scale)

    ys = np.arange(m + 1, dtype=np.float64)
    if y_true > m:
        degree, profile = 0, np.zeros(m + 1)
    elif y_false < 0:
        degree, profile = 0, np.full(m + 1, 3.0 * s)
    else:
        span = max(y_false, 0.5)
        xt = 2.0 * y_true / span - 1.0
        need = math.acosh(3.0 * s) / math.acosh(xt)
        degree = max(1, math.ceil(need - _TOL))
        if degree > bound:
            log.warning("threshold polynomial needs degree %d > bound %d; capping", degree, bound)
            degree = bound
        degree = min(degree, m)
        cheb = np.zeros(degree + 1)
        cheb[-1] = 1.0
        profile = chebyshev.chebval(2.0 * ys / span - 1.0, cheb)
    x_coeffs, u_coeffs = _profile_coefficients(profile, degree)
    return OrPtf(s, dim, float(t), float(eps), degree, bound, coords, profile, x_coeffs, u_coeffs)


# ---------------------------------------------------------------- the matrix

@dataclass(frozen=True)
class IndicatorMatrix:
    W: np.ndarray
    partition: list
    queries: np.ndarray
    cell_size: int
    r: float
    eps: float
    backend: str

    @property
    def cell_sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.partition])

    def close(self) -> np.ndarray:
        """Boolean mask of entries signalling a close cell."""
        return self.W > 2 * self.cell_sizes[:, None]

    def column(self, q: int) -> int:
        """Column index of query point ``q``."""
        pos = np.searchsorted(self.queries, q)
        if pos >= len(self.queries) or self.queries[pos] != q:
            raise KeyError(q)
        return int(pos)


def _repetitions(n: int) -> int:
    reps = max(1, math.ceil(C3 * math.log2(max(n, 2))))
    return reps if reps % 2 else reps + 1


def _cell_min_exact(X: BitPointSet, cells, queries) -> np.ndarray:
    out = np.empty((len(cells), len(queries)), dtype=np.int64)
    qw = X.words[queries]
    for i, cell in enumerate(cells):
        out[i] = hamming_block(X.words[cell], qw).min(axis=0)
    return out


def block_indicator_matrix(X: BitPointSet, r: float, eps: float, alpha: float = 0.5,
                           backend: str = "exact", seed: int = 0,
                           members=None, queries=None) -> IndicatorMatrix:
    """Build the indicator matrix of ``members`` (rows, via cells) against ``queries`` (columns)."""
    if not 0 < alpha <= 0.5:
        raise InvalidAlpha(f"cell exponent must lie in (0, 1/2], got {alpha}")
    if not 0 < eps < 1:
        raise InvalidThreshold(f"eps must lie in (0, 1), got {eps}")
    if not 0 <= r <= X.k:
        raise InvalidThreshold(f"radius must lie in [0, k={X.k}], got {r}")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    members = np.arange(X.n) if members is None else np.sort(np.asarray(members, dtype=np.int64))
    queries = members if queries is None else np.sort(np.asarray(queries, dtype=np.int64))

    nm = len(members)
    s = max(1, math.ceil(nm ** alpha - _TOL)) if nm else 1
    if backend == "ptf" and (s > PTF_MAX_DISJUNCTS or X.k > PTF_MAX_DIM):
        raise ScaleExceeded(f"ptf backend needs cell size <= {PTF_MAX_DISJUNCTS} and k <= {PTF_MAX_DIM}")
    perm = generator(seed, 0).permutation(members)
    cells = [np.sort(perm[i:i + s]) for i in range(0, nm, s)]
    sizes = np.array([len(c) for c in cells])
    if not cells or not len(queries):
        return IndicatorMatrix(np.zeros((len(cells), len(queries))), cells, queries, s, r, eps, backend)

    k = X.k
    if backend == "exact":
        dmin = _cell_min_exact(X, cells, queries)
        W = np.where(dmin <= r + eps * k, 3.0 * sizes[:, None], 0.0)
    elif backend == "sampled":
        W = _sampled(X, cells, sizes, queries, r, eps, seed)
    else:
        W = _ptf(X, cells, sizes, queries, r, eps, s, seed)
    return IndicatorMatrix(W, cells, queries, s, r, eps, backend)


def _sampled(X, cells, sizes, queries, r, eps, seed):
    k, n = X.k, X.n
    L = math.ceil(C2 * eps ** -2 * math.log(max(n, 2)))
    if L >= k:
        dmin = _cell_min_exact(X, cells, queries)
        return np.where(dmin <= r + eps * k / 2, 3.0 * sizes[:, None], 0.0)
    reps = _repetitions(n)
    bits = X.bits()
    qbits = bits[queries]
    votes = np.zeros((len(cells), len(queries)), dtype=np.int64)
    cut = r + eps * k / 2
    for rep in range(reps):
        for i, cell in enumerate(cells):
            idx = generator(seed, 1, rep, i).integers(0, k, size=L)
            a = 1.0 - 2.0 * bits[cell][:, idx].astype(np.float32)
            b = 1.0 - 2.0 * qbits[:, idx].astype(np.float32)
            mismatches = (L - a @ b.T) / 2.0
            est = mismatches.min(axis=0) * (k / L)
            votes[i] += est <= cut
    return np.where(2 * votes > reps, 3.0 * sizes[:, None], 0.0)


def _ptf(X, cells, sizes, queries, r, eps, s, seed):
    k, n = X.k, X.n
    reps = _repetitions(n)
    t = k - r - eps * k
    signs_all = 1.0 - 2.0 * X.bits().astype(np.float64)
    members = np.concatenate(cells)
    starts = np.cumsum([0] + [len(c) for c in cells[:-1]])
    draws = np.empty((reps, len(cells), len(queries)))
    seen = {}
    for rep in range(reps):
        poly = construct_or_ptf(s, k, max(t, 0.0), eps, seed=int(generator(seed, 2, rep).integers(2 ** 63)))
        key = (poly.degree, poly.coords.tobytes())
        if key not in seen:
            # a draw that keeps every coordinate is deterministic, so its products are reused
            width = sum(math.comb(poly.m, j) for j in range(poly.degree + 1))
            if width > PTF_MAX_FEATURES:
                raise ScaleExceeded(f"ptf feature dimension {width} exceeds {PTF_MAX_FEATURES}")
            signs = signs_all[:, poly.coords]
            psi = poly.features(signs[queries], weighted=False)
            phi = np.add.reduceat(poly.features(signs[members], weighted=True), starts, axis=0)
            seen = {key: phi @ psi.T}
        draws[rep] = seen[key]
    return np.median(draws, axis=0)
