"""Seeded random streams.

Every trial draws from its own Philox (counter-based) stream keyed by
``(seed, *indices)``, so serial and parallel runs see identical instances.
Gaussians come from Box-Muller on that stream's uniforms rather than numpy's
ziggurat, which keeps the variate sequence simple to reproduce elsewhere.
"""

from __future__ import annotations

import math

import numpy as np

_INV_SQRT2 = 1 / math.sqrt(2.0)
MASK64 = (1 << 64) - 1


class Stream:
    def __init__(self, seed: int, *indices: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.indices = tuple(int(i) for i in indices)
        ss = np.random.SeedSequence(seed, spawn_key=self.indices)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        return low + (high - low) * self._gen.random(size)

    def integers(self, low: int, high: int) -> int:
        """Integer in ``[low, high)``."""
        return int(self._gen.integers(low, high))

    def normal(self, size) -> np.ndarray:
        n = math.prod(size) if isinstance(size, tuple) else int(size)
        half = (n + 1) // 2
        u1 = 1.0 - self._gen.random(half)  # (0, 1], keeps log finite
        u2 = self._gen.random(half)
        rad = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * half)
        z[0::2] = rad * np.cos(2 * np.pi * u2)
        z[1::2] = rad * np.sin(2 * np.pi * u2)
        return z[:n].reshape(size)

    def complex_normal(self, size) -> np.ndarray:
        """Standard complex Gaussians, ``E|z|^2 = 1``."""
        z = self.normal((2,) + (size if isinstance(size, tuple) else (size,)))
        return (z[0] + 1j * z[1]) * _INV_SQRT2


def as_stream(seed) -> Stream:
    return seed if isinstance(seed, Stream) else Stream(int(seed))
