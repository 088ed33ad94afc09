"""Deterministic randomness for every stochastic component.

All shuffling, sampling and stochastic training in this package draws from
SplitMix64, a 64-bit splittable generator, combined with Fisher-Yates
permutation.  The exact algorithms are spelled out below so that a port in
another language can reproduce the streams bit for bit:

* ``SplitMix64`` state update: ``state = (state + 0x9E3779B97F4A7C15) mod 2^64``;
  output ``z = state``, ``z = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9``,
  ``z = (z XOR (z >> 27)) * 0x94D049BB133111EB``, ``return z XOR (z >> 31)``,
  all arithmetic mod 2^64.
* ``random()`` takes the top 53 bits: ``(next_u64() >> 11) * 2^-53``.
* ``below(n)`` maps one draw multiplicatively: ``(next_u64() * n) >> 64``.
* ``shuffle`` is Fisher-Yates from the last index down, ``j = below(i + 1)``.

Scoped seeds are derived by hashing a master seed together with a path of
text/integer parts (``derive_seed``), so independent units of work (folds,
elements, optimizer streams) get independent, reproducible streams.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Sequential SplitMix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        return (self.next_u64() * n) >> 64

    def shuffle(self, items) -> None:
        """In-place Fisher-Yates shuffle of a mutable sequence or 1-d array."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        order = list(range(n))
        self.shuffle(order)
        return order

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct indices from [0, n), in draw order (partial Fisher-Yates)."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        pool = list(range(n))
        out = []
        top = n
        for _ in range(k):
            j = self.below(top)
            out.append(pool[j])
            top -= 1
            pool[j] = pool[top]
        return out


def derive_seed(master: int, scope) -> int:
    """Stable 64-bit seed for a (master seed, scope path) pair.

    The scope is a sequence of strings/integers; each part is length-prefixed
    before hashing so distinct paths cannot collide by concatenation.
    """
    h = hashlib.sha256()
    h.update((master & _MASK64).to_bytes(8, "little"))
    for part in scope:
        raw = str(part).encode("utf-8")
        h.update(len(raw).to_bytes(4, "little"))
        h.update(raw)
    return int.from_bytes(h.digest()[:8], "little")
