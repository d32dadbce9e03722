"""Exact univariate polynomials and rational functions over Q in the variable h.

Coefficients are stored low-to-high as :class:`fractions.Fraction`.  Both
classes are immutable and hashable.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

__all__ = ["Poly", "PolyRat", "as_fraction"]


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions and floats (exactly, via their binary value)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _strip(c: list) -> tuple:
    n = len(c)
    while n and c[n - 1] == 0:
        n -= 1
    return tuple(c[:n])


class Poly:
    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable = ()):
        self.c = _strip([as_fraction(a) for a in coeffs])

    @classmethod
    def _raw(cls, c: tuple) -> "Poly":
        p = object.__new__(cls)
        p.c = c
        return p

    @classmethod
    def const(cls, a) -> "Poly":
        return cls([a])

    @classmethod
    def h(cls) -> "Poly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def lead(self) -> Fraction:
        return self.c[-1] if self.c else Fraction(0)

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.c == other.c
        if isinstance(other, (int, Fraction)):
            return self.c == Poly.const(other).c
        return NotImplemented

    def __hash__(self):
        return hash(self.c)

    def __neg__(self):
        return Poly._raw(tuple(-a for a in self.c))

    def __add__(self, other):
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] += x
        return Poly._raw(_strip(out))

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.c, other.c
        if not a or not b:
            return Poly._raw(())
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return Poly._raw(_strip(out))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, a) -> "Poly":
        a = as_fraction(a)
        if a == 0:
            return Poly._raw(())
        return Poly._raw(tuple(a * x for x in self.c))

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.c)
        dl = other.c[-1]
        dd = other.degree
        if self.degree < dd:
            return Poly._raw(()), self
        q = [Fraction(0)] * (self.degree - dd + 1)
        for shift in range(self.degree - dd, -1, -1):
            coef = rem[shift + dd] / dl
            q[shift] = coef
            if coef:
                for i, y in enumerate(other.c):
                    rem[shift + i] -= coef * y
        return Poly._raw(_strip(q)), Poly._raw(_strip(rem[:dd]))

    def monic(self) -> "Poly":
        if not self.c:
            return self
        return self.scale(1 / self.c[-1])

    def deriv(self) -> "Poly":
        return Poly._raw(_strip([i * a for i, a in enumerate(self.c)][1:]))

    def __call__(self, x):
        """Horner evaluation; works for floats, Fractions, mpmath numbers, numpy arrays."""
        if not self.c:
            return 0 * x
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for a in reversed(self.c):
                acc = acc * x + a
            return acc
        acc = 0 * x + float(self.c[-1]) if not _is_mp(x) else x * 0 + _mpf(self.c[-1])
        conv = _mpf if _is_mp(x) else float
        for a in reversed(self.c[:-1]):
            acc = acc * x + conv(a)
        return acc

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        return format_poly(self.c)


def _is_mp(x) -> bool:
    return type(x).__module__.startswith("mpmath")


def _mpf(a: Fraction):
    import mpmath

    return mpmath.mpf(a.numerator) / a.denominator


def _coerce_poly(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    return NotImplemented


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    return a.monic()


def format_poly(c: Sequence[Fraction], var: str = "h") -> str:
    if not c:
        return "0"
    terms = []
    for i in range(len(c) - 1, -1, -1):
        a = c[i]
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        mag = -a if a < 0 else a
        if i == 0:
            body = str(mag)
        else:
            mon = var if i == 1 else f"{var}^{i}"
            body = mon if mag == 1 else f"{mag}*{mon}"
        terms.append((sign, body))
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


class PolyRat:
    """Rational function num/den with gcd(num, den) = 1 and den monic."""

    __slots__ = ("num", "den")

    def __init__(self, num=0, den=None, *, _normalized: bool = False):
        num = num if isinstance(num, Poly) else Poly.const(num) if not isinstance(num, (list, tuple)) else Poly(num)
        den = Poly.const(1) if den is None else (den if isinstance(den, Poly) else Poly(den) if isinstance(den, (list, tuple)) else Poly.const(den))
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not _normalized:
            if num.is_zero():
                den = Poly.const(1)
            elif den.degree > 0:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num = num.divmod(g)[0]
                    den = den.divmod(g)[0]
            lc = den.lead()
            if lc != 1:
                num = num.scale(1 / lc)
                den = den.scale(1 / lc)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, a) -> "PolyRat":
        return cls(Poly.const(a))

    @classmethod
    def h(cls) -> "PolyRat":
        return cls(Poly.h())

    @classmethod
    def zero(cls) -> "PolyRat":
        return cls(Poly())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, other):
        other = _coerce_rat(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __neg__(self):
        return PolyRat(-self.num, self.den, _normalized=True)

    def __add__(self, other):
        other = _coerce_rat(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return PolyRat(self.num + other.num, self.den)
        return PolyRat(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce_rat(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce_rat(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return PolyRat.zero()
        if other.den.degree == 0 and other.num.degree == 0:
            return PolyRat(self.num.scale(other.num.c[0] / other.den.c[0]), self.den, _normalized=True)
        return PolyRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_rat(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return self * PolyRat(other.den, other.num)

    def __rtruediv__(self, other):
        return _coerce_rat(other) / self

    def __pow__(self, n: int):
        if n >= 0:
            return PolyRat(self.num ** n, self.den ** n, _normalized=True)
        return PolyRat(self.den ** (-n), self.num ** (-n))

    def deriv(self) -> "PolyRat":
        return PolyRat(self.num.deriv() * self.den - self.num * self.den.deriv(), self.den * self.den)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def degree_bound(self) -> int:
        """deg(num) - deg(den); -1 stands in for -inf on the zero function."""
        if self.is_zero():
            return -1
        return self.num.degree - self.den.degree

    def times_poly_is_poly(self, p: Poly) -> Poly | None:
        """Return self*p as a Poly when it is one, else None."""
        q, r = (self.num * p).divmod(self.den)
        return q if r.is_zero() else None

    def to_json(self) -> dict:
        return {
            "num": [f"{a.numerator}/{a.denominator}" for a in self.num.c],
            "den": [f"{a.numerator}/{a.denominator}" for a in self.den.c],
        }

    @classmethod
    def from_json(cls, d: dict) -> "PolyRat":
        return cls(Poly([Fraction(s) for s in d["num"]]), Poly([Fraction(s) for s in d["den"]]))

    def __repr__(self):
        return f"PolyRat({self})"

    def __str__(self):
        if self.den.degree == 0:
            return str(self.num)
        return f"({self.num})/({self.den})"


def _coerce_rat(x):
    if isinstance(x, PolyRat):
        return x
    if isinstance(x, Poly):
        return PolyRat(x, _normalized=True)
    if isinstance(x, (int, Fraction)):
        return PolyRat(Poly.const(x), _normalized=True)
    return NotImplemented
