"""PCG32 random number generator (O'Neill's XSH-RR variant, 64-bit state).

Synthetic pages must come out bit-identical on every platform and in any
language that re-implements the generator, so we do not rely on numpy's
distribution code (whose streams may change between releases).

State transition::

    state = state * 6364136223846793005 + inc   (mod 2**64)

Output is the xorshift-high / random-rotate permutation of the old state.
Seeding follows the reference ``pcg32_srandom_r(initstate, initseq)``.
"""
from __future__ import annotations

_MASK64 = (1 << 64) - 1
_MULT = 6364136223846793005

DEFAULT_STREAM = 54


class PCG32:
    def __init__(self, seed: int, stream: int = DEFAULT_STREAM):
        self.state = 0
        self.inc = ((stream << 1) | 1) & _MASK64
        self._step()
        self.state = (self.state + (seed & _MASK64)) & _MASK64
        self._step()

    def _step(self) -> None:
        self.state = (self.state * _MULT + self.inc) & _MASK64

    def next_u32(self) -> int:
        old = self.state
        self._step()
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` without modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound > 1 << 32:
            raise ValueError("bound must fit in 32 bits")
        threshold = (1 << 32) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]``."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.below(hi - lo + 1)

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` with 53 random bits."""
        hi = self.next_u32() >> 5
        lo = self.next_u32() >> 6
        return (hi * 67108864.0 + lo) / 9007199254740992.0

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()
