"""Portable seeded randomness: splitmix64 mixing and the xoshiro256** generator.

Variant generation, receiver impairment, and experiment seeding all draw
from streams keyed by (seed, indices...) so that any two runs -- or any two
implementations of the same algorithms -- produce identical choices without
sharing generator state.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64_mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def splitmix64_stream(seed: int, count: int) -> list[int]:
    """First `count` outputs of splitmix64 from `seed`."""
    state = seed & _MASK64
    out = []
    for _ in range(count):
        state = (state + _SPLITMIX_GAMMA) & _MASK64
        out.append(_splitmix64_mix(state))
    return out


def mix64(seed: int, *parts: int) -> int:
    """Fold integer parts into a seed, one splitmix64 finalizer pass per part.

    Used everywhere a derived stream key is needed (per-trial seeds,
    per-token substitution streams); the part order is significant.
    """
    acc = seed & _MASK64
    for part in parts:
        acc = _splitmix64_mix(((acc ^ (part & _MASK64)) + _SPLITMIX_GAMMA) & _MASK64)
    return acc


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** with its 256-bit state filled from splitmix64(seed)."""

    def __init__(self, seed: int):
        self._s = splitmix64_stream(seed, 4)

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def randrange(self, n: int) -> int:
        """Integer in [0, n) via multiply-shift; bias is < n / 2**64."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        return (self.next_u64() * n) >> 64

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_prefix(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), drawn by partial Fisher-Yates.

        Drawing k and then k+1 from identically seeded streams yields nested
        sets, which the masking experiments rely on for paired comparisons.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randrange(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def stream(seed: int, *parts: int) -> Xoshiro256StarStar:
    """Independent generator keyed by (seed, parts...)."""
    return Xoshiro256StarStar(mix64(seed, *parts))
