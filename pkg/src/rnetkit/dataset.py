"""Point-set containers, file ingestion and dataset statistics."""

from __future__ import annotations

import csv
import enum
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .kernels import hamming_matrix
from .errors import (
    AllPointsIdentical,
    BadFormat,
    EmptyDataset,
    NonFiniteValue,
    RaggedRows,
)

MAGIC = b"RNK1"
_HEADER = struct.Struct("<4sQQB")


class Metric(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    HAMMING = "hamming"

    @property
    def tag(self) -> int:
        return {Metric.L1: 1, Metric.L2: 2, Metric.HAMMING: 3}[self]

    @classmethod
    def from_tag(cls, tag: int) -> "Metric":
        for m in cls:
            if m.tag == tag:
                return m
        raise BadFormat(f"unknown metric tag {tag}")

    @property
    def scipy_name(self) -> str:
        return {Metric.L1: "cityblock", Metric.L2: "euclidean", Metric.HAMMING: "cityblock"}[self]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PointSet:
    """Immutable n x d real point set tagged with its metric.

    Equality and hashing are by identity, which lets caches key on the
    object itself.
    """

    points: np.ndarray
    metric: Metric = Metric.L2
    ids: tuple = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise BadFormat("points must be a 2-D array")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise EmptyDataset("a point set needs n >= 1 and d >= 1")
        bad = np.argwhere(~np.isfinite(pts))
        if len(bad):
            row, col = bad[0]
            raise NonFiniteValue(int(row), int(col))
        metric = Metric(self.metric)
        if metric is Metric.HAMMING:
            raise BadFormat("use BitPointSet for Hamming data")
        ids = tuple(range(pts.shape[0])) if self.ids is None else tuple(self.ids)
        if len(ids) != pts.shape[0] or len(set(ids)) != len(ids):
            raise BadFormat("ids must be unique, one per row")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def subset(self, idx) -> "PointSet":
        idx = np.asarray(idx, dtype=np.int64)
        return PointSet(self.points[idx], self.metric, tuple(self.ids[i] for i in idx))

    def distances(self, rows=None, cols=None) -> np.ndarray:
        """Exact distance block between ``rows`` and ``cols`` (index arrays, None = all)."""
        a = self.points if rows is None else self.points[np.asarray(rows, dtype=np.int64)]
        b = self.points if cols is None else self.points[np.asarray(cols, dtype=np.int64)]
        return cdist(a, b, metric=self.metric.scipy_name)

    def distance(self, i: int, j: int) -> float:
        return float(self.distances([i], [j])[0, 0])


# ---------------------------------------------------------------- bit points

_WORD = 64


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack an (n, k) 0/1 array into (n, ceil(k/64)) little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n, k = bits.shape
    nw = (k + _WORD - 1) // _WORD
    padded = np.zeros((n, nw * _WORD), dtype=np.uint8)
    padded[:, :k] = bits
    by = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(by).view("<u8").astype(np.uint64).reshape(n, nw)


def unpack_bits(words: np.ndarray, k: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    by = words.view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(by, axis=1, bitorder="little")[:, :k]


@dataclass(frozen=True, eq=False)
class BitPointSet:
    """n points of {0,1}^k, bit-packed into uint64 words (bit i of word w is coordinate 64w+i)."""

    words: np.ndarray
    k: int

    def __post_init__(self):
        w = np.asarray(self.words, dtype=np.uint64)
        if w.ndim != 2 or w.shape[0] < 1:
            raise EmptyDataset("a bit point set needs n >= 1")
        if self.k < 1 or w.shape[1] != (self.k + _WORD - 1) // _WORD:
            raise BadFormat("word count does not match k")
        tail = self.k % _WORD
        if tail and np.any(w[:, -1] >> np.uint64(tail)):
            raise BadFormat("bits set beyond dimension k")
        object.__setattr__(self, "words", _frozen(w))

    @classmethod
    def from_bits(cls, bits) -> "BitPointSet":
        bits = np.asarray(bits)
        if bits.ndim != 2:
            raise BadFormat("bits must be a 2-D array")
        if not np.isin(bits, (0, 1)).all():
            raise BadFormat("Hamming coordinates must be 0 or 1")
        return cls(pack_bits(bits), bits.shape[1])

    @property
    def n(self) -> int:
        return self.words.shape[0]

    metric = Metric.HAMMING

    def __len__(self):
        return self.n

    def bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.k)

    def subset(self, idx) -> "BitPointSet":
        return BitPointSet(self.words[np.asarray(idx, dtype=np.int64)], self.k)

    def distances(self, rows=None, cols=None) -> np.ndarray:
        a = self.words if rows is None else self.words[np.asarray(rows, dtype=np.int64)]
        b = self.words if cols is None else self.words[np.asarray(cols, dtype=np.int64)]
        return hamming_block(a, b)

    def distance(self, i: int, j: int) -> int:
        return int(np.bitwise_count(self.words[i] ^ self.words[j]).sum())


def hamming_block(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Hamming distances between packed rows of ``a`` and ``b`` (popcount of XOR)."""
    a = np.ascontiguousarray(a, dtype=np.uint64)
    b = np.ascontiguousarray(b, dtype=np.uint64)
    return hamming_matrix(a, b)


# ---------------------------------------------------------------- file io

def load_points(path, format: str = "csv", metric: Metric | str = Metric.L2):
    """Read a point file.

    CSV files carry no metric, so ``metric`` is applied to them; packed
    binary files carry their own tag. A Hamming metric yields a BitPointSet.
    """
    path = Path(path)
    if format == "csv":
        rows = _read_csv(path)
        metric = Metric(metric)
        if metric is Metric.HAMMING:
            return BitPointSet.from_bits(np.asarray(rows, dtype=np.int64))
        return PointSet(np.asarray(rows, dtype=np.float64), metric)
    if format in ("packed", "packed-binary", "bin"):
        return _read_packed(path)
    raise BadFormat(f"unknown format {format!r}")


def _parse_row(row: Sequence[str], lineno: int) -> list[float]:
    out = []
    for col, tok in enumerate(row):
        try:
            v = float(tok)
        except ValueError:
            raise BadFormat(f"row {lineno}, column {col}: cannot parse {tok!r}") from None
        if not math.isfinite(v):
            raise NonFiniteValue(lineno, col, tok.strip())
        out.append(v)
    return out


def _is_numeric(row) -> bool:
    try:
        [float(t) for t in row]
    except ValueError:
        return False
    return True


def _read_csv(path: Path) -> list[list[float]]:
    with open(path, newline="") as fh:
        raw = [r for r in csv.reader(fh) if r and any(t.strip() for t in r)]
    if raw and not _is_numeric(raw[0]):
        raw = raw[1:]
    if not raw:
        raise EmptyDataset(f"{path}: no data rows")
    width = len(raw[0])
    rows = []
    for i, r in enumerate(raw):
        if len(r) != width:
            raise RaggedRows(i, width, len(r))
        rows.append(_parse_row(r, i))
    return rows


def _read_packed(path: Path):
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise BadFormat(f"{path}: truncated header")
    magic, n, d, tag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadFormat(f"{path}: bad magic {magic!r}")
    if n == 0 or d == 0:
        raise EmptyDataset(f"{path}: empty point set")
    body = data[_HEADER.size:]
    if len(body) != 8 * n * d:
        raise BadFormat(f"{path}: expected {8 * n * d} payload bytes, found {len(body)}")
    pts = np.frombuffer(body, dtype="<f8").reshape(n, d)
    metric = Metric.from_tag(tag)
    bad = np.argwhere(~np.isfinite(pts))
    if len(bad):
        raise NonFiniteValue(int(bad[0][0]), int(bad[0][1]))
    if metric is Metric.HAMMING:
        return BitPointSet.from_bits(pts.astype(np.int64))
    return PointSet(pts.copy(), metric)


def save_points(X, path, format: str = "packed") -> None:
    path = Path(path)
    if isinstance(X, BitPointSet):
        pts, metric = X.bits().astype(np.float64), Metric.HAMMING
    else:
        pts, metric = X.points, X.metric
    if format == "csv":
        fmt = "%d" if metric is Metric.HAMMING else "%.17g"
        np.savetxt(path, pts, delimiter=",", fmt=fmt)
        return
    head = _HEADER.pack(MAGIC, pts.shape[0], pts.shape[1], metric.tag)
    path.write_bytes(head + np.ascontiguousarray(pts, dtype="<f8").tobytes())


# ---------------------------------------------------------------- statistics

def spread(X) -> float:
    """Exact ratio of the largest to the smallest nonzero pairwise distance."""
    if X.n < 2:
        raise AllPointsIdentical("spread needs at least two points")
    if isinstance(X, BitPointSet):
        D = X.distances()[np.triu_indices(X.n, 1)].astype(np.float64)
    else:
        D = pdist(X.points, metric=X.metric.scipy_name)
    pos = D[D > 0]
    if not len(pos):
        raise AllPointsIdentical("all points coincide; spread undefined")
    return float(D.max() / pos.min())


def distinct_representatives(X) -> tuple[np.ndarray, np.ndarray]:
    """First index of every distinct row, and each row's representative index."""
    arr = X.words if isinstance(X, BitPointSet) else X.points
    _, first, inverse = np.unique(arr, axis=0, return_index=True, return_inverse=True)
    rep = first[inverse.ravel()]
    return np.sort(first), rep
