"""Compiled inner loops. Every parallel loop writes disjoint outputs, so results do not depend on thread count."""

import numba
import numpy as np

# the portable layer; the system TBB is too old for numba
numba.config.THREADING_LAYER = "workqueue"

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@numba.njit(inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


@numba.njit(cache=True, parallel=True)
def hamming_matrix(a, b):
    na, nw = a.shape
    nb = b.shape[0]
    out = np.empty((na, nb), np.int64)
    for i in numba.prange(na):
        for j in range(nb):
            s = np.uint64(0)
            for w in range(nw):
                s += _popcount(a[i, w] ^ b[j, w])
            out[i, j] = s
    return out


# shift that makes scaled coordinates positive, so truncation equals floor
_SHIFT = 2.0 ** 40
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@numba.njit(inline="always")
def _mix_bit(z):
    # splitmix64 finalizer; adjacent inputs give independent-looking top bits
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return (z ^ (z >> np.uint64(31))) >> np.uint64(63)


@numba.njit(cache=True, parallel=True)
def grid_hash_bits(XT, coords, offsets, mult, add, inv_w):
    """Bit i of point p is the parity of hashed bits of mult*cell + add over the cells of its coordinates."""
    n = XT.shape[1]
    k, m = coords.shape
    nw = (k + 63) // 64
    out = np.zeros((n, nw), np.uint64)
    for w in numba.prange(nw):
        acc = np.empty(n, np.uint64)
        for i in range(w * 64, min(k, w * 64 + 64)):
            acc[:] = 0
            for j in range(m):
                row = XT[coords[i, j]]
                b = offsets[i, j] + _SHIFT
                mu = mult[i, j]
                ad = add[i, j]
                for p in range(n):
                    h = np.uint64(row[p] * inv_w + b)
                    acc[p] ^= _mix_bit(h * mu + ad)
            s = np.uint64(i & 63)
            for p in range(n):
                out[p, w] |= acc[p] << s
    return out
