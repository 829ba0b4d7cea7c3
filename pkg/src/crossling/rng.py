"""Pinned deterministic PRNG (splitmix64) plus Fisher-Yates helpers.

Dataset permutations and distractor sampling must be reproducible across
platforms and independent of Python's hash randomization or stdlib RNG
version, so the generator is spelled out here and its version tag is
recorded in every manifest that depends on it.
"""

from __future__ import annotations

SHUFFLE_ALGORITHM = "splitmix64-fy/1"

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 sequence generator; 64-bit state, 64-bit outputs."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), bias-free via rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % bound


def shuffled(items, seed: int) -> list:
    """New list holding a Fisher-Yates permutation of ``items``."""
    out = list(items)
    rng = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def sample(items, count: int, rng: SplitMix64) -> list:
    """Draw ``count`` items without replacement (partial Fisher-Yates)."""
    pool = list(items)
    if count > len(pool):
        raise ValueError(f"cannot sample {count} from {len(pool)} items")
    picked = []
    for _ in range(count):
        j = rng.below(len(pool))
        picked.append(pool.pop(j))
    return picked
