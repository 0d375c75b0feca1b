"""Monomial cost terms c * n^a * r^b * s^c * lambda^d.

These carry the stage costs symbolically: exponents are exact Fractions so
the balancing algebra (solving for r = n^x, s = n^-t) stays rational, and
``evaluate`` plugs in concrete parameter values for the numeric optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["CostTerm"]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class CostTerm:
    coeff: Fraction = Fraction(1)
    n: Fraction = Fraction(0)
    r: Fraction = Fraction(0)
    s: Fraction = Fraction(0)
    lam: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coeff", _frac(self.coeff))
        for name in ("n", "r", "s", "lam"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if self.coeff <= 0:
            raise ValueError(f"coefficient must be positive, got {self.coeff}")

    # -- algebra ---------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, CostTerm):
            return CostTerm(
                coeff=self.coeff * other.coeff,
                n=self.n + other.n,
                r=self.r + other.r,
                s=self.s + other.s,
                lam=self.lam + other.lam,
            )
        return CostTerm(coeff=self.coeff * _frac(other), n=self.n, r=self.r, s=self.s, lam=self.lam)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, CostTerm):
            return CostTerm(
                coeff=self.coeff / other.coeff,
                n=self.n - other.n,
                r=self.r - other.r,
                s=self.s - other.s,
                lam=self.lam - other.lam,
            )
        return CostTerm(coeff=self.coeff / _frac(other), n=self.n, r=self.r, s=self.s, lam=self.lam)

    def pow(self, exponent) -> "CostTerm":
        e = _frac(exponent)
        if self.coeff != 1:
            root = self.coeff ** e if e.denominator == 1 else None
            if root is None:
                raise ValueError(f"cannot raise coefficient {self.coeff} to {e} exactly")
            coeff = root
        else:
            coeff = Fraction(1)
        return CostTerm(coeff=coeff, n=self.n * e, r=self.r * e, s=self.s * e, lam=self.lam * e)

    def sqrt(self) -> "CostTerm":
        return self.pow(Fraction(1, 2))

    def substitute_lambda(self, lam_term: "CostTerm") -> "CostTerm":
        """Replace lambda by another monomial (e.g. r^{d/(d+1)})."""
        return CostTerm(
            coeff=self.coeff,
            n=self.n + lam_term.n * self.lam,
            r=self.r + lam_term.r * self.lam,
            s=self.s + lam_term.s * self.lam,
            lam=lam_term.lam * self.lam,
        )

    # -- evaluation -------------------------------------------------------

    def evaluate(self, n, r=None, s=None, lam=None) -> float:
        """Numeric value at positive parameters; unused symbols may be omitted."""
        value = float(self.coeff) * float(n) ** float(self.n)
        for exponent, x, name in ((self.r, r, "r"), (self.s, s, "s"), (self.lam, lam, "lambda")):
            if exponent == 0:
                continue
            if x is None:
                raise ValueError(f"term {self} needs a value for {name}")
            if not float(x) > 0:
                raise ValueError(f"{name} must be positive, got {x}")
            value *= float(x) ** float(exponent)
        return value

    def exponent_at(self, x, t, z=None) -> Fraction:
        """Total n-exponent under r = n^x, s = n^-t (and lambda = n^z)."""
        out = self.n + self.r * _frac(x) - self.s * _frac(t)
        if self.lam != 0:
            if z is None:
                raise ValueError(f"term {self} needs a lambda exponent")
            out += self.lam * _frac(z)
        return out

    # -- formatting --------------------------------------------------------

    def __str__(self):
        parts = [] if self.coeff == 1 else [str(self.coeff)]
        for name, exp in (("n", self.n), ("r", self.r), ("s", self.s), ("lambda", self.lam)):
            if exp == 0:
                continue
            parts.append(name if exp == 1 else f"{name}^{exp}")
        return "*".join(parts) if parts else "1"
