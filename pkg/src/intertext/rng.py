"""Deterministic 64-bit PRNG for every place randomness must be reproducible.

Dataset splits, parameter initialization, and epoch shuffles all draw from
xoshiro256** seeded through splitmix64, with a Fisher-Yates shuffle on top.
The algorithms are frozen to the public-domain reference definitions
(Blackman & Vigna) so another implementation following the same recipe
reproduces partitions and parameter draws bit-for-bit:

  * seeding: state = four successive splitmix64 outputs of the u64 seed
  * doubles: (next_u64() >> 11) * 2**-53, uniform on [0, 1)
  * bounded ints: next_u64() % n (modulo reduction; the bias of at most
    n / 2**64 is accepted in exchange for trivial portability)
  * shuffle: Fisher-Yates, descending index i, j = next_below(i + 1)
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
_SPLITMIX_MUL2 = 0x94D049BB133111EB


def _check_u64(value: int, name: str) -> int:
    if not isinstance(value, int) or not 0 <= value <= MASK64:
        raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
    return value


def splitmix64(seed: int, n: int) -> list[int]:
    """Return the first ``n`` outputs of splitmix64 for the given seed."""
    _check_u64(seed, "seed")
    out = []
    state = seed
    for _ in range(n):
        state = (state + _SPLITMIX_GAMMA) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * _SPLITMIX_MUL1) & MASK64
        z = ((z ^ (z >> 27)) * _SPLITMIX_MUL2) & MASK64
        out.append(z ^ (z >> 31))
    return out


class Xoshiro256StarStar:
    """xoshiro256** 1.0 with splitmix64 seeding."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        self._s0, self._s1, self._s2, self._s3 = splitmix64(seed, 4)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        x = (s1 * 5) & MASK64
        result = (((x << 7) | (x >> 57)) & MASK64) * 9 & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def next_float(self) -> float:
        """Uniform double on [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by modulo reduction."""
        if n <= 0:
            raise ValueError(f"n must be positive, got {n}")
        return self.next_u64() % n

    def uniform(self, lo: float, hi: float) -> float:
        return lo + self.next_float() * (hi - lo)

    def fill_uniform(self, n: int, lo: float = 0.0, hi: float = 1.0) -> list[float]:
        """n uniform draws on [lo, hi); identical to n uniform() calls.

        Inlined for speed: parameter initialization draws millions of values.
        """
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        span = hi - lo
        out = [0.0] * n
        for i in range(n):
            x = (s1 * 5) & MASK64
            r = (((x << 7) | (x >> 57)) & MASK64) * 9 & MASK64
            t = (s1 << 17) & MASK64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
            out[i] = lo + (r >> 11) * 2.0**-53 * span
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return out

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle (descending index)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]
