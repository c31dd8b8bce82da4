"""Deterministic randomness for shard reproducibility.

The generator identity is part of the shard-file contract: every stochastic
step in the pipeline (chunk shuffling, no-curriculum ordering, special-token
initialization) draws from SplitMix64, and permutations use Fisher-Yates with
modulo reduction, exactly as specified below.  Any consumer in any language
can reproduce the byte-identical artifacts from the seed alone.

SplitMix64 (Steele, Lea & Flood's mix function):

    state += 0x9E3779B97F4A7C15                      (mod 2^64)
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9         (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB         (mod 2^64)
    output = z ^ (z >> 31)

Fisher-Yates: for i = n-1 down to 1, j = next_u64() mod (i+1), swap a[i], a[j].

Sub-seed derivation: derive_seed(master, tag) seeds a SplitMix64 stream with
master XOR fnv1a64(tag-utf8-bytes) and returns its first output.
"""

from __future__ import annotations

from typing import MutableSequence, Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

T = TypeVar("T")


class SplitMix64:
    """64-bit SplitMix generator with the exact update rule documented above."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Uniform-ish draw in [0, n) by modulo reduction (contractual)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_seed(master: int, tag: str) -> int:
    """Derive a purpose-specific sub-seed from the master seed and a tag."""
    return SplitMix64((master & _MASK64) ^ fnv1a64(tag.encode("utf-8"))).next_u64()


def shuffled(items: Sequence[T], seed: int) -> list[T]:
    """Return a new list holding a Fisher-Yates permutation of ``items``."""
    out = list(items)
    shuffle_in_place(out, seed)
    return out


def shuffle_in_place(items: MutableSequence[T], seed: int) -> None:
    rng = SplitMix64(seed)
    for i in range(len(items) - 1, 0, -1):
        j = rng.next_below(i + 1)
        items[i], items[j] = items[j], items[i]
