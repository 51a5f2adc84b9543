"""Exact scalars: rationals and complex numbers with rational parts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union


@dataclass(frozen=True)
class QComplex:
    """Complex number whose real and imaginary parts are rationals.

    Arithmetic results with a zero imaginary part collapse back to a plain
    :class:`~fractions.Fraction`, so real data never carries a ``QComplex``.
    """

    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @staticmethod
    def make(re, im) -> "Scalar":
        re, im = Fraction(re), Fraction(im)
        return re if im == 0 else QComplex(re, im)

    def _parts(self, other):
        if isinstance(other, QComplex):
            return other.re, other.im
        return Fraction(other), Fraction(0)

    def __add__(self, other):
        a, b = self._parts(other)
        return QComplex.make(self.re + a, self.im + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._parts(other)
        return QComplex.make(self.re - a, self.im - b)

    def __rsub__(self, other):
        a, b = self._parts(other)
        return QComplex.make(a - self.re, b - self.im)

    def __mul__(self, other):
        a, b = self._parts(other)
        return QComplex.make(self.re * a - self.im * b, self.re * b + self.im * a)

    __rmul__ = __mul__

    def __neg__(self):
        return QComplex(-self.re, -self.im)

    def __abs__(self) -> Fraction:
        return modulus(self)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __eq__(self, other):
        if isinstance(other, QComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))


Scalar = Union[Fraction, QComplex]


def to_scalar(x) -> Scalar:
    """Coerce ``x`` into an exact scalar.

    Floats are converted exactly (every finite double is a dyadic rational),
    strings go through :class:`Fraction`, Python complex numbers become
    :class:`QComplex`.
    """
    if isinstance(x, QComplex):
        return QComplex.make(x.re, x.im)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    if isinstance(x, complex):
        return QComplex.make(Fraction(x.real), Fraction(x.imag))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact scalar")


def _exact_sqrt(r: Fraction) -> Fraction | None:
    n, d = r.numerator, r.denominator
    sn, sd = math.isqrt(n), math.isqrt(d)
    if sn * sn == n and sd * sd == d:
        return Fraction(sn, sd)
    return None


def modulus(x: Scalar) -> Fraction:
    """``|x|`` as a rational.

    Exact for reals and for complex values whose squared modulus is a
    rational square; otherwise the nearest double, converted exactly.
    """
    if not isinstance(x, QComplex):
        return abs(Fraction(x))
    sq = x.re * x.re + x.im * x.im
    root = _exact_sqrt(sq)
    if root is not None:
        return root
    return Fraction(math.sqrt(sq))


def is_real(x: Scalar) -> bool:
    return not isinstance(x, QComplex)


def encode_rational(x: Fraction) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def decode_rational(obj) -> Fraction:
    if isinstance(obj, dict):
        if set(obj) != {"num", "den"}:
            raise ValueError(f"malformed rational {obj!r}")
        if int(obj["den"]) == 0:
            raise ValueError("zero denominator")
        return Fraction(int(obj["num"]), int(obj["den"]))
    if isinstance(obj, (int, str)):
        return Fraction(obj)
    if isinstance(obj, float):
        return Fraction(obj)
    raise ValueError(f"malformed rational {obj!r}")


def encode_scalar(x: Scalar) -> dict:
    if isinstance(x, QComplex):
        return {"re": encode_rational(x.re), "im": encode_rational(x.im)}
    return encode_rational(x)


def decode_scalar(obj) -> Scalar:
    if isinstance(obj, dict) and "re" in obj:
        return QComplex.make(decode_rational(obj["re"]), decode_rational(obj.get("im", 0)))
    return decode_rational(obj)


def dyadic_round(x: Fraction, denominator: int) -> Fraction:
    """Nearest multiple of ``1/denominator`` (ties to even)."""
    return Fraction(round(Fraction(x) * denominator), denominator)
