"""Net & Prune: decider outcomes, constant-spread interval search, and (1+eps) refinement."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Protocol, Union

import numpy as np

from .dataset import distinct_representatives
from .errors import DeciderInconsistent, NoPositiveDistance
from .seeding import child, generator

log = logging.getLogger(__name__)

SPREAD = 64.0
SMALL_SET = 16
MAX_PROBES = 400


@dataclass(frozen=True)
class Below:
    """The optimum is at most ``claim``."""
    claim: float
    witness: object = None


@dataclass(frozen=True)
class Above:
    """The optimum is at least ``claim``."""
    claim: float
    witness: object = None


@dataclass(frozen=True)
class Interval:
    """The optimum lies in [lo, hi]."""
    lo: float
    hi: float
    witness: object = None


DeciderOutcome = Union[Below, Above, Interval]


class Decider(Protocol):
    eps: float

    def decide(self, r: float, X) -> DeciderOutcome:
        ...


@dataclass
class SearchResult:
    lo: float
    hi: float
    probes: int
    witness: object = None  # witness of the tightest Below outcome seen
    mode: str = "driver"


class _Bounds:
    def __init__(self, D: Decider, X):
        self.D, self.X = D, X
        self.lo, self.hi = 0.0, math.inf
        self.probes = 0
        self.witness = None
        self.interval = None

    def probe(self, r: float) -> DeciderOutcome:
        if self.probes >= MAX_PROBES:
            raise DeciderInconsistent(f"no bracketing interval after {MAX_PROBES} decider calls")
        self.probes += 1
        out = self.D.decide(r, self.X)
        log.debug("probe r=%g -> %s", r, type(out).__name__)
        if isinstance(out, Interval):
            self.interval = out
            self.lo, self.hi = max(self.lo, out.lo), min(self.hi, out.hi)
            if out.witness is not None:
                self.witness = out.witness
        elif isinstance(out, Below):
            if out.claim < self.hi:
                self.hi = out.claim
                self.witness = out.witness
        else:
            self.lo = max(self.lo, out.claim)
        if self.lo > self.hi * (1 + 1e-12):
            raise DeciderInconsistent(f"decider claims optimum in [{self.lo:g}, {self.hi:g}]")
        return out

    @property
    def done(self) -> bool:
        return self.interval is not None or (self.lo > 0 and self.hi / self.lo <= SPREAD)

    def result(self, mode) -> SearchResult:
        if self.interval is not None:
            iv = self.interval
            return SearchResult(iv.lo, iv.hi, self.probes, iv.witness if iv.witness is not None else self.witness, mode)
        return SearchResult(self.lo, self.hi, self.probes, self.witness, mode)


def _nn_distance(X, p: int, rows: np.ndarray) -> float:
    d = X.distances([p], rows)[0].astype(np.float64)
    d = d[d > 0]
    return float(d.min()) if len(d) else 0.0


def _geometric(b: _Bounds, start: float) -> None:
    r = start
    while not b.done:
        if b.lo == 0 and math.isinf(b.hi):
            pass
        elif math.isinf(b.hi):
            r = b.lo * 8
        elif b.lo == 0:
            r = b.hi / 8
        else:
            r = math.sqrt(b.lo * b.hi)
        b.probe(r)
        if b.lo == 0 and math.isinf(b.hi):
            raise DeciderInconsistent("decider returned an outcome that bounds nothing")


def netprune_search(X, D: Decider, seed: int, mode: str = "driver") -> SearchResult:
    """Find [lo, hi] containing the optimum with hi/lo <= 64.

    ``driver`` alternates coarsening (net centers) and pruning (DelFar) of
    a working set whose nearest-neighbor distances supply probe radii;
    ``doubling`` does an exponential search from one random
    nearest-neighbor distance.
    """
    from .rnet import _approx_rnet, _delfar

    reps, _ = distinct_representatives(X)
    if len(reps) < 2:
        raise NoPositiveDistance("all points coincide; no positive distance to search over")
    rng = generator(seed, 40)
    b = _Bounds(D, X)
    start = _nn_distance(X, int(reps[rng.integers(len(reps))]), reps)
    if mode == "doubling":
        _geometric(b, start)
        return b.result(mode)
    if mode != "driver":
        raise ValueError(f"unknown search mode {mode!r}")

    eps_net = D.eps / 4
    work = reps
    step = 0
    while not b.done and len(work) > SMALL_SET:
        step += 1
        sub = X.subset(work)
        ell = _nn_distance(sub, int(rng.integers(len(work))), np.arange(len(work)))
        if ell <= 0:
            break
        out = b.probe(ell / 2)
        if b.done:
            break
        s = child(seed, 41, step)
        if isinstance(out, Below):
            keep, _ = _delfar(sub, ell / 2, eps_net, s)
            nxt = work[keep]
        else:
            b.probe(2 * ell)
            if b.done:
                break
            if b.hi <= 2 * ell:
                break
            net = _approx_rnet(sub, ell, eps_net, s)
            nxt = work[np.sort(net.centers)]
        if len(nxt) >= len(work) or len(nxt) < 2:
            break
        work = nxt
    if not b.done and 2 <= len(work) <= SMALL_SET:
        # exhaustive bracketing over the remaining pairwise distances
        Dw = X.distances(work, work)[np.triu_indices(len(work), 1)]
        cand = np.unique(Dw[Dw > 0])
        lo_i, hi_i = 0, len(cand) - 1
        while lo_i <= hi_i and not b.done:
            mid = (lo_i + hi_i) // 2
            if isinstance(b.probe(float(cand[mid])), Below):
                hi_i = mid - 1
            else:
                lo_i = mid + 1
    if not b.done:
        _geometric(b, b.lo * 8 if b.lo > 0 else (b.hi / 8 if math.isfinite(b.hi) else start))
    return b.result(mode)


@dataclass
class Refined:
    value: float
    calls: int
    witness: object = None


def refine_interval(lo: float, hi: float, D: Decider, eps: float, X=None,
                    on_interval: Callable[[Interval], float] | None = None) -> Refined:
    """Binary search over the slices lo (1+eps)^j of [lo, hi].

    Assumes the decider's Below/Above claims sit at the probed radius.
    Returns v with f <= v <= (1+eps) f. An Interval outcome ends the
    search through ``on_interval`` (default: its upper end).
    """
    if not 0 < lo <= hi:
        raise ValueError(f"need 0 < lo <= hi, got [{lo}, {hi}]")
    if hi <= lo * (1 + eps):
        return Refined(hi, 0)
    J = math.ceil(math.log(hi / lo) / math.log1p(eps) - 1e-12)
    slices = lo * (1 + eps) ** np.arange(J + 1)
    slices[-1] = max(slices[-1], hi)
    a, z = 0, J  # f in [slices[a], slices[z]]
    calls = 0
    witness = None
    while z - a > 1:
        m = (a + z) // 2
        out = D.decide(float(slices[m]), X)
        calls += 1
        if isinstance(out, Interval):
            v = on_interval(out) if on_interval else out.hi
            return Refined(float(v), calls, out.witness)
        if isinstance(out, Below):
            z = m
            witness = out.witness
        else:
            a = m
    return Refined(float(slices[z]), calls, witness)
