"""SplitMix64, a small portable generator used for input mappings.

The algorithm is the one published by Steele, Lea and Flood (2014) and used to
seed the xoshiro family.  It is implemented here in pure Python so that a
mapping built from a given seed is bit-identical on every platform and numpy
version.  Bounded integers use rejection sampling, so the shuffle is unbiased.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def shuffle(self, items: list) -> list:
        """Fisher-Yates shuffle in place; returns ``items``."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


def derive_seed(seed: int, *salt: int) -> int:
    """Mix extra integers into a seed, giving independent sub-streams."""
    s = seed & _MASK64
    for value in salt:
        s = SplitMix64(s ^ ((value * _GOLDEN) & _MASK64)).next_u64()
    return s
