"""Counter-based 64-bit random source used for trace generation and data values.

The generator is splitmix64. Given a 64-bit input x, the permutation is:

    z = (x + 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    out = z ^ (z >> 31)

A stream with seed s produces mix64(s + 0x9E3779B97F4A7C15 * k) for k = 1, 2, ...
Identical seeds give identical streams on every platform; there is no global state.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """One splitmix64 step (golden-ratio increment plus finalizer) on x.

    mix64(0) == 0xE220A8397B1DCDAF, the canonical splitmix64 first output for
    seed 0. This is the exact bit formula behind both trace generation and the
    functional oracle; any reimplementation must match it bit for bit.
    """
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic counter-mode stream over mix64."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64((self.seed + GOLDEN * self.counter) & MASK64)

    def random(self) -> float:
        # 53 uniform bits, same construction most PRNG libraries use
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        # Fisher-Yates, in place
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]

    def geometric(self, mean: float) -> int:
        """Number of failures before a success, with the given mean (>= 0)."""
        if mean <= 0:
            return 0
        import math

        p_keep = mean / (mean + 1.0)
        u = self.random()
        if u >= 1.0:
            u = 1.0 - 2.0 ** -53
        return int(math.log(1.0 - u) / math.log(p_keep)) if u > 0.0 else 0
