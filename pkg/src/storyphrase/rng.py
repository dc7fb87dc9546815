"""Deterministic, portable pseudo-random source.

All randomness in the toolkit flows through SplitMix64 so that a seed
reproduces byte-identical results on any platform or implementation.
The generator is the splitmix64 finalizer of Steele, Lea & Flood:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

with all arithmetic modulo 2**64.  Derived values are specified here so
an independent implementation can match them exactly:

* ``next_u64()``      -- the raw 64-bit output above.
* ``next_float()``    -- ``(next_u64() >> 11) / 2**53`` in [0, 1).
* ``next_below(n)``   -- ``next_u64() % n`` (modulo; n is small everywhere
  we use it, so the bias is negligible and portability wins).
* ``choice(seq)``     -- ``seq[next_below(len(seq))]``.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def next_below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def choice(self, seq):
        if not seq:
            raise ValueError("empty sequence")
        return seq[self.next_below(len(seq))]
