"""Deterministic randomness for splits, sampling, and mock generation.

Every random choice in the pipeline flows through SplitMix64, a fixed
64-bit generator (Steele, Lea & Flood's mixing function, as used by
java.util.SplittableRandom). Results are therefore bit-stable across
platforms and interpreter versions, which the artifact-determinism
guarantees rely on. Independent streams are derived from a base seed
plus string labels via SHA-256.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def derive_seed(base: int, *labels: str) -> int:
    """Derive an independent 64-bit child seed from a base seed and labels."""
    material = str(base & _MASK64) + "".join("/" + label for label in labels)
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class SplitMix64:
    """SplitMix64 stream with rejection-sampled bounded draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) without modulo bias."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        # reject draws from the tail that would skew the modulo
        limit = _MASK64 - (_MASK64 + 1) % bound
        while True:
            r = self.next_u64()
            if r <= limit:
                return r % bound

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), in ascending order."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n} indices")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:k])

    def choice(self, items: list):
        return items[self.below(len(items))]
