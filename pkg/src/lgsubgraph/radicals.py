"""Exact arithmetic on sums of square roots of rationals.

Reweighting a learning graph by per-stage factors sqrt(C1/C0) makes edge
weights irrational, so complexity bounds like C'(E) <= C(E_1) + ... + C(E_k)
compare sums of square roots.  ``SqrtSum`` stores such values exactly as
{radicand: coefficient} with integer radicands kept square-reduced, which
lets the no-tolerance property tests decide every comparison.

Sign determination: terms with equal radicands are combined, so a value that
is algebraically zero has no terms left (distinct square-free radicands are
linearly independent over the rationals).  A nonzero value is then separated
from zero by interval refinement with integer square roots.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

__all__ = ["SqrtSum"]


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, flag in enumerate(sieve) if flag]


_PRIMES = _small_primes(1000)


def _reduce_radicand(n: int) -> tuple[int, int]:
    """Write n = outside**2 * inside with inside square-reduced.

    Trial division by small primes plus a perfect-square check on the
    cofactor; good enough for the magnitudes reached by toy fixtures.
    """
    if n < 0:
        raise ValueError("radicand must be nonnegative")
    if n in (0, 1):
        return 1, n
    outside = 1
    for p in _PRIMES:
        sq = p * p
        if sq > n:
            break
        while n % sq == 0:
            n //= sq
            outside *= p
    root = math.isqrt(n)
    if root * root == n:
        return outside * root, 1
    return outside, n


class SqrtSum:
    """Exact finite sum  sum_i c_i * sqrt(q_i)  with rational c_i, integer q_i."""

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self._terms: dict[int, Fraction] = {}
        if terms:
            for rad, coeff in terms.items():
                if coeff:
                    self._terms[rad] = self._terms.get(rad, Fraction(0)) + coeff
            self._terms = {q: c for q, c in self._terms.items() if c}

    # -- constructors -------------------------------------------------

    @classmethod
    def of(cls, value) -> "SqrtSum":
        """Embed a rational number."""
        if isinstance(value, SqrtSum):
            return value
        return cls({1: Fraction(value)})

    @classmethod
    def sqrt(cls, value) -> "SqrtSum":
        """Exact square root of a nonnegative rational."""
        if isinstance(value, SqrtSum):
            if value.is_rational():
                value = value.as_fraction()
            else:
                raise ValueError("sqrt of a non-rational SqrtSum is not representable")
        frac = Fraction(value)
        if frac < 0:
            raise ValueError("sqrt of negative value")
        if frac == 0:
            return cls()
        # sqrt(a/b) = sqrt(a*b) / b
        outside, inside = _reduce_radicand(frac.numerator * frac.denominator)
        return cls({inside: Fraction(outside, frac.denominator)})

    # -- predicates / conversions --------------------------------------

    def is_rational(self) -> bool:
        return all(q == 1 for q in self._terms)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self._terms.get(1, Fraction(0))

    def __float__(self) -> float:
        return float(sum(float(c) * math.sqrt(q) for q, c in self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "SqrtSum(0)"
        parts = [f"{c}*sqrt({q})" if q != 1 else f"{c}" for q, c in sorted(self._terms.items())]
        return "SqrtSum(" + " + ".join(parts) + ")"

    # -- ring operations -----------------------------------------------

    @staticmethod
    def _coerce(other) -> "SqrtSum | None":
        if isinstance(other, SqrtSum):
            return other
        if isinstance(other, Rational):
            return SqrtSum.of(other)
        return None

    def __add__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        merged = dict(self._terms)
        for q, c in rhs._terms.items():
            merged[q] = merged.get(q, Fraction(0)) + c
        return SqrtSum(merged)

    __radd__ = __add__

    def __neg__(self):
        return SqrtSum({q: -c for q, c in self._terms.items()})

    def __sub__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return rhs + (-self)

    def __mul__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for q1, c1 in self._terms.items():
            for q2, c2 in rhs._terms.items():
                # q1, q2 square-reduced: q1*q2 = g^2 * (q1/g) * (q2/g)
                g = math.gcd(q1, q2)
                outside, inside = _reduce_radicand((q1 // g) * (q2 // g))
                coeff = c1 * c2 * g * outside
                out[inside] = out.get(inside, Fraction(0)) + coeff
        return SqrtSum(out)

    __rmul__ = __mul__

    def inverse(self) -> "SqrtSum":
        """Exact inverse; only single-term values occur in this package."""
        if len(self._terms) != 1:
            raise ValueError("inverse only supported for single-term SqrtSum")
        (q, c), = self._terms.items()
        # 1 / (c sqrt(q)) = sqrt(q) / (c q)
        return SqrtSum({q: Fraction(1) / (c * q)})

    def __truediv__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self * rhs.inverse()

    def __rtruediv__(self, other):
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = SqrtSum.of(1)
        for _ in range(exponent):
            result = result * self
        return result

    # -- exact ordering --------------------------------------------------

    def sign(self) -> int:
        if not self._terms:
            return 0
        coeffs = list(self._terms.values())
        if all(c > 0 for c in coeffs):
            return 1
        if all(c < 0 for c in coeffs):
            return -1
        for bits in (32, 64, 128, 256, 512, 1024):
            lo = Fraction(0)
            hi = Fraction(0)
            scale = 1 << bits
            for q, c in self._terms.items():
                root_lo = Fraction(math.isqrt(q * scale * scale), scale)
                root_hi = root_lo + Fraction(1, scale)
                if c > 0:
                    lo += c * root_lo
                    hi += c * root_hi
                else:
                    lo += c * root_hi
                    hi += c * root_lo
            if lo > 0:
                return 1
            if hi < 0:
                return -1
        raise ArithmeticError(f"cannot separate {self!r} from zero")

    def _cmp(self, other) -> int:
        rhs = self._coerce(other)
        if rhs is None:
            raise TypeError(f"cannot compare SqrtSum with {type(other)}")
        return (self - rhs).sign()

    def __eq__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return (self - rhs).sign() == 0

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if self.is_rational():
            return hash(self.as_fraction())
        return hash(tuple(sorted(self._terms.items())))
