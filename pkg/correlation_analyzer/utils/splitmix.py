"""Deterministic 64-bit generator for seeded instance generation.

The stream is the classic splitmix64 sequence: the state advances by the
golden-ratio increment and each output is a finalized copy of the state.
Reruns with the same seed reproduce every generated graph and weight.
"""

from __future__ import annotations

from fractions import Fraction

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Value in ``[0, bound)``; modulo reduction, bias is irrelevant here."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return self.next() % bound

    def between(self, low: int, high: int) -> int:
        """Value in the closed range ``[low, high]``."""
        return low + self.below(high - low + 1)

    def positive_fraction(self, bound: int) -> Fraction:
        return Fraction(self.between(1, bound), self.between(1, bound))

    def fork(self) -> "SplitMix64":
        return SplitMix64(self.next())


__all__ = ["SplitMix64"]
