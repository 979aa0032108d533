"""Deterministic 64-bit generator and shuffle used for run-order randomization.

Run plans must be reproducible bit-for-bit from a seed, independent of any
language runtime's RNG. The generator is SplitMix64 (Steele, Lea & Flood's
mix function; the same algorithm used to seed the xoshiro family):

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z <- ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output <- z XOR (z >> 31)

Seeding rule: the initial state is the seed itself, reduced mod 2^64.
Bounded draws use rejection sampling (no modulo bias). Shuffling is the
Fisher-Yates algorithm iterating from the last index down, swapping index i
with a draw from [0, i].
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

T = TypeVar("T")


class SplitMix64:
    """SplitMix64 stream; state advances by the golden-gamma increment."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_uint64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Unbiased draw from [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % bound


def fisher_yates(items: Sequence[T], rng: SplitMix64) -> list[T]:
    """Return a shuffled copy; consumes exactly len(items)-1 bounded draws."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
