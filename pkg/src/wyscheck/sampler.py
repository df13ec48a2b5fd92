"""Exact-count uniform selection of domain indices.

Selection sampling (Knuth's Algorithm S) drives the stream. The PRNG is the
standard library's Mersenne Twister (``random.Random``) seeded with the
integer seed, so a seed fixes the selection on every platform.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterator, List

# Algorithm S visits every index; above this many visits per selected index
# we switch to rejection sampling of distinct indices.
FALLBACK_RATIO = 10 ** 7


def target_count(size: int, rate: float) -> int:
    """max(1, round(rate * size)) clamped to ``size``; halves round up."""
    if size <= 0:
        return 0
    if not 0 < rate <= 1:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    n = int((Decimal(repr(rate)) * size).to_integral_value(rounding=ROUND_HALF_UP))
    return min(size, max(1, n))


@dataclass(frozen=True)
class SamplePlan:
    size: int
    rate: float = 1.0
    seed: int = 0

    @property
    def count(self) -> int:
        return target_count(self.size, self.rate)

    def indices(self) -> Iterator[int]:
        return select(self.size, self.count, self.seed)


def select(size: int, count: int, seed: int) -> Iterator[int]:
    """Yield ``count`` distinct indices from ``range(size)`` in increasing order."""
    if count <= 0 or size <= 0:
        return iter(())
    if count >= size:
        return iter(range(size))
    rng = random.Random(seed)
    if size > FALLBACK_RATIO * count:
        return iter(_rejection(rng, size, count))
    return _algorithm_s(rng, size, count)


def _algorithm_s(rng: random.Random, size: int, count: int) -> Iterator[int]:
    chosen = 0
    for i in range(size):
        # select i with probability (count - chosen) / (size - i)
        if rng.randrange(size - i) < count - chosen:
            yield i
            chosen += 1
            if chosen == count:
                return


def _rejection(rng: random.Random, size: int, count: int) -> List[int]:
    seen = set()
    while len(seen) < count:
        seen.add(rng.randrange(size))
    return sorted(seen)
