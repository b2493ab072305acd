"""Seeded randomness.

Row shuffles use a SplitMix64 stream so partitions are identical on every
platform and numpy version. Array draws (weight init, synthetic features)
go through numpy's PCG64, seeded from the same root via :func:`derive_seed`.

Seed derivation: ``derive_seed(root, tag)`` mixes ``root`` with the CRC-32
of ``tag`` through one SplitMix64 step, so each pipeline stage ("split",
"init", "folds", ...) gets an independent but reproducible seed.
"""

import zlib

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, no modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)``."""
        idx = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return np.asarray(idx, dtype=np.int64)


def derive_seed(root: int, tag: str) -> int:
    return _mix((root & _MASK) ^ ((zlib.crc32(tag.encode("utf-8")) * _GOLDEN) & _MASK))


def numpy_rng(root: int, tag: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(root, tag)))
