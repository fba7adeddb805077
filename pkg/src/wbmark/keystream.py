"""Keyed coefficient-pair generator built on splitmix64."""

import numpy as np

from .errors import ParameterError

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

DEFAULT_MIDRANGE = (10, 36)


def check_midrange(midrange):
    lo, hi = midrange
    if not (0 <= lo < hi <= 64) or hi - lo < 2:
        raise ParameterError(f"mid-range band [{lo}, {hi}) must lie in [0, 64) and span >= 2")
    return int(lo), int(hi)


class KeyStream:
    """Deterministic splitmix64 stream seeded by a 64-bit key."""

    def __init__(self, seed):
        if not 0 <= seed <= MASK64:
            raise ParameterError(f"key must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.state = int(seed)

    def next_u64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_pair(self, midrange=DEFAULT_MIDRANGE):
        """Two distinct zig-zag indices from ``[lo, hi)``."""
        lo, hi = check_midrange(midrange)
        span = hi - lo
        z1 = lo + self.next_u64() % span
        z2 = lo + self.next_u64() % span
        while z2 == z1:
            z2 = lo + self.next_u64() % span
        return z1, z2


def draw_pairs(key, count, midrange=DEFAULT_MIDRANGE):
    """The first ``count`` pairs of the stream as an ``(count, 2)`` int64 array."""
    ks = KeyStream(key)
    out = np.empty((count, 2), dtype=np.int64)
    for j in range(count):
        out[j] = ks.next_pair(midrange)
    return out
