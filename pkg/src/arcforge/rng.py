"""SplitMix64, the seeded generator behind every randomised suite.

State update and output mixing follow the reference constants, so the same
seed gives the same stream in any language::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

Doubles take the top 53 bits: ``(next() >> 11) * 2**-53``.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    def uniform(self, lo: float = 0.0, hi: float = 1.0, size=None):
        if size is None:
            return lo + (hi - lo) * self.random()
        n = int(np.prod(size))
        out = np.array([self.random() for _ in range(n)]).reshape(size)
        return lo + (hi - lo) * out

    def integers(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] inclusive."""
        return lo + int(self.random() * (hi - lo + 1))

    def normal(self, size) -> np.ndarray:
        """Standard normals by Box-Muller."""
        n = int(np.prod(size))
        u1 = 1.0 - self.uniform(size=n)
        u2 = self.uniform(size=n)
        return (np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)).reshape(size)

    def simplex(self, n: int) -> np.ndarray:
        """Random point of the probability simplex (normalised exponentials)."""
        e = -np.log(1.0 - self.uniform(size=n))
        return e / e.sum()

    def choice(self, seq):
        return seq[self.integers(0, len(seq) - 1)]
