"""Deterministic random streams built on SplitMix64.

SplitMix64 (Steele/Lea/Flood; the splittable generator shipped in Java 8
and used as a seeder by most modern PRNG libraries) passes BigCrush and is
counter based: draw k of a stream with seed s is ``mix64(s + (k+1)*GAMMA)``.
Two properties make it the right fit here:

* independent substreams are derived by hashing tuples such as
  (base seed, grid point, run, ballot), so parallel execution order cannot
  change results;
* a whole matrix of draws can be produced with vectorised numpy uint64
  arithmetic that matches the scalar stream bit for bit.

Reproducibility is guaranteed within this implementation; bit compatibility
with other SplitMix64 *stream protocols* is not a goal.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TO_DOUBLE = 2.0 ** -53

_GAMMA_U = np.uint64(GAMMA)
_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)


def mix64(z: int) -> int:
    """The SplitMix64 finalizer: avalanche one 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Hash a tuple of non-negative integers into one 64-bit seed."""
    acc = 0
    for p in parts:
        acc = mix64((acc + GAMMA + (p & MASK64)) & MASK64)
    return acc


class RandomStream:
    """A seeded stream of uniform draws.

    Identical seeds give identical draw sequences.  Draw k is a pure
    function of (seed, k), so a consumer that skips draws still sees the
    same values at the same positions as one that reads them all.
    """

    __slots__ = ("seed", "_count")

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._count = 0

    def next_raw(self) -> int:
        self._count += 1
        return mix64((self.seed + self._count * GAMMA) & MASK64)

    def uniform(self) -> float:
        """Uniform float64 in [0, 1)."""
        return (self.next_raw() >> 11) * _TO_DOUBLE

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.uniform() * n)

    @classmethod
    def for_parts(cls, *parts: int) -> "RandomStream":
        return cls(derive_seed(*parts))


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1_U
    z = (z ^ (z >> np.uint64(27))) * _M2_U
    return z ^ (z >> np.uint64(31))


def seed_vector(prefix_parts: tuple[int, ...], start: int, count: int) -> np.ndarray:
    """Seeds for ``count`` consecutive substreams (start, start+1, ...).

    Equals ``derive_seed(*prefix_parts, i)`` for each index i, computed as a
    uint64 array.
    """
    acc = np.uint64((derive_seed(*prefix_parts) + GAMMA) & MASK64)
    idx = np.arange(start, start + count, dtype=np.uint64)
    return _mix64_vec(acc + idx)


def draw_matrix(seeds: np.ndarray, ncols: int) -> np.ndarray:
    """Uniform float64 matrix; row i column k equals draw k of RandomStream(seeds[i])."""
    ks = np.arange(1, ncols + 1, dtype=np.uint64) * _GAMMA_U
    raw = _mix64_vec(seeds[:, None] + ks[None, :])
    return (raw >> np.uint64(11)).astype(np.float64) * _TO_DOUBLE
