"""Seedable xorshift64* generator.

The algorithm is fixed (splitmix64 seeding, xorshift64* output) so that a
seed reproduces the same trial sequence on any platform.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    name = "xorshift64*"

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        state = _splitmix64(self.seed & _MASK)
        self._state = state or 0x2545F4914F6CDD1D
        self._spare: float | None = None

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return low + (high - low) * u

    def normal(self) -> float:
        # Box-Muller, second variate cached
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = 1.0 - self.uniform()  # (0, 1]
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def normals(self, *shape: int) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        return np.array([self.normal() for _ in range(n)]).reshape(shape)

    def uniforms(self, low: float, high: float, *shape: int) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        return np.array([self.uniform(low, high) for _ in range(n)]).reshape(shape)

    def spawn(self) -> "XorShift64Star":
        """Independent child stream seeded from this one."""
        return XorShift64Star(self.next_u64())
