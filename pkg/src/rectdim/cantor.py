"""Missing-digit Cantor sets: axis specification and digit-word arithmetic.

A Cantor word of length q over digits L in base b is identified with the
integer whose base-b expansion (zero padded to q places) uses only digits
from L.  The helpers below count and list such integers inside a range
without enumerating them, which is what keeps very deep constructions
tractable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .errors import ValidationError

_SYMBOLS = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class CantorAxisSpec:
    """Base ``b`` and allowed digit set; ``delta`` is the Ahlfors exponent."""

    base: int
    digits: tuple[int, ...]

    def __post_init__(self):
        b = int(self.base)
        digs = tuple(sorted(set(int(x) for x in self.digits)))
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "digits", digs)
        if b < 2 or b > 36:
            raise ValidationError(f"base must be in [2, 36], got {b}")
        if len(digs) < 2 or digs[0] < 0 or digs[-1] >= b:
            raise ValidationError(f"need at least two digits in [0, {b - 1}], got {digs}")

    @classmethod
    def full(cls, base: int) -> "CantorAxisSpec":
        return cls(base, tuple(range(base)))

    @property
    def k(self) -> int:
        return len(self.digits)

    @property
    def delta(self) -> float:
        return math.log(self.k) / math.log(self.base)

    @property
    def log_base(self) -> float:
        return math.log(self.base)

    @property
    def is_full(self) -> bool:
        return self.k == self.base

    def words(self, n: int) -> list[int]:
        """All Cantor integers of length ``n`` in increasing order (small n only)."""
        out = [0]
        for _ in range(n):
            out = [x * self.base + dg for x in out for dg in self.digits]
        return out

    def as_dict(self) -> dict:
        return {"base": self.base, "digits": list(self.digits)}


class WordCounter:
    """Rank/unrank of length-q Cantor integers, vectorised through base strings."""

    def __init__(self, axis: CantorAxisSpec):
        self.axis = axis
        b, digs = axis.base, axis.digits
        self._to_k = str.maketrans({_SYMBOLS[dg]: _SYMBOLS[i] for i, dg in enumerate(digs)})
        self._from_k = str.maketrans({_SYMBOLS[i]: _SYMBOLS[dg] for i, dg in enumerate(digs)})
        allowed = set(_SYMBOLS[dg] for dg in digs)
        self._bad = "".join(c for c in _SYMBOLS[:b] if c not in allowed)
        # number of allowed digits strictly below each digit value
        self._less = {_SYMBOLS[v]: sum(1 for dg in digs if dg < v) for v in range(b)}

    def rank(self, x, q: int):
        """Number of Cantor integers of length ``q`` that are <= x."""
        b, K = self.axis.base, self.axis.k
        if x < 0:
            return gmpy2.mpz(0)
        x = gmpy2.mpz(x)
        if x >= gmpy2.mpz(b) ** q:
            return gmpy2.mpz(K) ** q
        if q == 0:
            return gmpy2.mpz(1)
        s = gmpy2.digits(x, b).zfill(q)
        f = -1
        if self._bad:
            # first digit that is not allowed
            hits = [s.find(c) for c in self._bad]
            hits = [h for h in hits if h >= 0]
            f = min(hits) if hits else -1
        if f < 0:
            return gmpy2.mpz(s.translate(self._to_k), K) + 1
        head = gmpy2.mpz(s[:f].translate(self._to_k), K) if f > 0 else gmpy2.mpz(0)
        rest = q - f
        return head * gmpy2.mpz(K) ** rest + self._less[s[f]] * gmpy2.mpz(K) ** (rest - 1)

    def unrank(self, i, q: int):
        """The i-th (0-based) Cantor integer of length ``q``."""
        K = self.axis.k
        if q == 0:
            return gmpy2.mpz(0)
        s = gmpy2.digits(gmpy2.mpz(i), K).zfill(q)
        return gmpy2.mpz(s.translate(self._from_k), self.axis.base)

    def count(self, lo, hi, q: int):
        """Cantor integers w of length q with lo <= w <= hi."""
        if hi < lo:
            return gmpy2.mpz(0)
        return self.rank(hi, q) - self.rank(lo - 1, q)


def floor_div(a, b):
    return gmpy2.f_div(gmpy2.mpz(a), gmpy2.mpz(b))


def ceil_div(a, b):
    return gmpy2.c_div(gmpy2.mpz(a), gmpy2.mpz(b))


class AffineWordFamily:
    """Points ``alpha * w + beta`` for Cantor integers w of length ``q``.

    Used for every sibling family in the mass tree: the positions are exact
    integers in a common unit, ``alpha > 0``.
    """

    def __init__(self, counter: WordCounter, q: int, alpha, beta):
        self.counter = counter
        self.q = q
        self.alpha = gmpy2.mpz(alpha)
        self.beta = gmpy2.mpz(beta)

    def _w_range(self, lo, hi):
        return ceil_div(lo - self.beta, self.alpha), floor_div(hi - self.beta, self.alpha)

    def count(self, lo, hi):
        wlo, whi = self._w_range(lo, hi)
        return self.counter.count(wlo, whi, self.q)

    def first_index(self, lo):
        wlo = ceil_div(lo - self.beta, self.alpha)
        return self.counter.rank(wlo - 1, self.q)

    def position(self, index):
        return self.alpha * self.counter.unrank(index, self.q) + self.beta

    def items(self, lo, hi, limit: int = 64):
        n = self.count(lo, hi)
        if n > limit:
            raise ValueError(f"{n} items requested, limit {limit}")
        start = self.first_index(lo)
        return [self.position(start + j) for j in range(int(n))]


def cantor_cdf(axis: CantorAxisSpec, x: Fraction) -> Fraction:
    """Natural Cantor measure of [0, x] for rational x, exactly.

    The base-b expansion of a rational is eventually periodic, so the digit
    recursion closes into a linear fixed point once a remainder repeats.
    """
    x = Fraction(x)
    if x <= 0:
        return Fraction(0)
    if x >= 1:
        return Fraction(1)
    b, K = axis.base, axis.k
    less = [sum(1 for dg in axis.digits if dg < v) for v in range(b)]
    allowed = set(axis.digits)
    # F(x) = sum_j (prod of 1/K for earlier digits) * less[d_j]/K, stopping at
    # the first disallowed digit (which contributes its 'less' count and ends).
    seen = {}
    coeffs = []  # (offset, scale) accumulated per step: F = off + scale * F(rest)
    off, scale = Fraction(0), Fraction(1)
    rem = x
    while True:
        if rem in seen:
            i = seen[rem]
            off_i, scale_i = coeffs[i]
            # F(rem) = (off - off_i)/scale_i + (scale/scale_i) F(rem) on the cycle
            c = (off - off_i) / scale_i
            s = scale / scale_i
            f_rem = c / (1 - s)
            return off_i + scale_i * f_rem
        if rem == 0:
            return off
        seen[rem] = len(coeffs)
        coeffs.append((off, scale))
        rem *= b
        dg = int(rem)
        rem -= dg
        off += scale * Fraction(less[dg], K)
        if dg not in allowed:
            # the remaining mass below x in this digit cell is the whole lower part
            return off
        scale /= K


def cantor_measure(axis: CantorAxisSpec, lo: Fraction, hi: Fraction) -> Fraction:
    """Natural Cantor measure of the interval [lo, hi] (the measure has no atoms)."""
    if hi <= lo:
        return Fraction(0)
    return cantor_cdf(axis, hi) - cantor_cdf(axis, lo)
