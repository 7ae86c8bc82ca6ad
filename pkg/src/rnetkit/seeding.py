"""Seeded randomness.

Every randomized routine takes a plain integer seed and derives child
streams by counter-based splitting, so results never depend on call order
or on how many threads evaluated independent pieces.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def as_seed(value) -> int:
    value = int(value)
    if not 0 <= value <= MASK64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {value}")
    return value


def generator(seed: int, *keys: int) -> np.random.Generator:
    """Philox generator for the stream identified by ``(seed, *keys)``."""
    ss = np.random.SeedSequence(as_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def child(seed: int, *keys: int) -> int:
    """A fresh 64-bit seed for a sub-computation."""
    ss = np.random.SeedSequence(as_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
