"""Exact scalars: rationals (gmpy2 ``mpq``) and Gaussian rationals.

Everything exact in the package is built from these two types. Real data
(structure constants, metrics, 2-forms) stays in ``mpq``; complex numbers
only appear once eigenbundles enter, and those use :class:`GaussianRational`.
"""

from __future__ import annotations

import numbers
from fractions import Fraction

from gmpy2 import mpq

__all__ = [
    "mpq",
    "GaussianRational",
    "I",
    "to_exact",
    "to_rational",
    "parse_rational",
    "is_exact",
    "conj",
]


class GaussianRational:
    """A number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)) or type(other) is type(mpq(0)):
            return GaussianRational(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if not n:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __repr__(self):
        if not self.im:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"


I = GaussianRational(0, 1)

_MPQ = type(mpq(0))


def parse_rational(text: str):
    """Parse ``"p/q"``, ``"p"`` or a decimal literal into an exact rational.

    Raises ``ValueError`` on malformed input.
    """
    s = str(text).strip()
    if not s:
        raise ValueError("empty rational literal")
    try:
        return mpq(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc


def to_rational(x):
    """Convert ints, Fractions, mpq or rational strings to ``mpq``."""
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, bool):
        return mpq(int(x))
    if isinstance(x, (int, Fraction)):
        return mpq(x)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, GaussianRational):
        if x.im:
            raise ValueError(f"{x} is not real")
        return x.re
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact input; use 'p/q' strings")
    if isinstance(x, numbers.Rational):
        return mpq(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def to_exact(x):
    """Convert to ``mpq`` when real, :class:`GaussianRational` otherwise."""
    if isinstance(x, GaussianRational):
        return x.re if not x.im else x
    if isinstance(x, complex):
        raise TypeError("complex floats are not accepted as exact input")
    return to_rational(x)


def is_exact(x) -> bool:
    return isinstance(x, (_MPQ, GaussianRational, int, Fraction))


def conj(x):
    if isinstance(x, GaussianRational):
        return x.conjugate()
    return x
