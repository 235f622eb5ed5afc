"""
Portable seeded random numbers.

Every random quantity in the package (initial vectors, controller weights,
random diagonals, permutations) comes from :class:`XorShift64Star`, so a run
is reproducible from its integer seed alone, independent of numpy's
generator versions.

The generator is xorshift64* (Vigna 2014). With 64-bit unsigned state ``x``::

    x ^= x >> 12
    x ^= x << 25   (mod 2**64)
    x ^= x >> 27
    out = x * 0x2545F4914F6CDD1D   (mod 2**64)

The state is initialised from the user seed by one round of splitmix64::

    z = (seed + 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    x = z ^ (z >> 31)      (replaced by 1 if zero)

Doubles use the top 53 output bits: ``u = (out >> 11) * 2**-53`` in [0, 1).
"""

import numpy as np

_MASK = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_TWO_M53 = 2.0 ** -53


def splitmix64(seed):
    z = (seed + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    """xorshift64* generator seeded through splitmix64."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        self.seed = int(seed)
        self.state = splitmix64(self.seed & _MASK) or 1

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & _MASK

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _TWO_M53

    def open_unit(self) -> float:
        """Uniform double in the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * _TWO_M53

    def uniform(self, low, high, size):
        u = np.array([self.random() for _ in range(size)], dtype=float)
        return low + (high - low) * u

    def open_uniform(self, size):
        return np.array([self.open_unit() for _ in range(size)], dtype=float)

    def randbelow(self, n: int) -> int:
        return int(self.random() * n)

    def permutation(self, items):
        """Fisher-Yates shuffle of a copy of ``items``."""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.randbelow(i + 1)
            out[i], out[j] = out[j], out[i]
        return out
