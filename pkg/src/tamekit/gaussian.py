"""Exact Gaussian rationals, elements of Q(i).

A value is stored as ``(re + im*i) / den`` with integer ``re``, ``im`` and a
positive integer ``den``, reduced so that ``gcd(re, im, den) == 1``. Keeping
one shared denominator makes products and sums plain integer arithmetic,
which matters for the word-ball enumerations in :mod:`tamekit.sl2`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

GaussianLike = Union["GaussianRational", int, Fraction]


def _norm(re: int, im: int, den: int) -> tuple[int, int, int]:
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if den < 0:
        re, im, den = -re, -im, -den
    g = math.gcd(re, im, den)
    if g > 1:
        re, im, den = re // g, im // g, den // g
    return re, im, den


class GaussianRational:
    __slots__ = ("_re", "_im", "_den", "_hash")

    def __init__(self, re: int | Fraction = 0, im: int | Fraction = 0) -> None:
        re = Fraction(re)
        im = Fraction(im)
        den = re.denominator * im.denominator // math.gcd(re.denominator, im.denominator)
        self._re, self._im, self._den = _norm(
            re.numerator * (den // re.denominator),
            im.numerator * (den // im.denominator),
            den,
        )
        self._hash = None

    @classmethod
    def _raw(cls, re: int, im: int, den: int) -> GaussianRational:
        obj = cls.__new__(cls)
        obj._re, obj._im, obj._den = _norm(re, im, den)
        obj._hash = None
        return obj

    @classmethod
    def from_parts(cls, re: int, im: int, den: int = 1) -> GaussianRational:
        return cls._raw(int(re), int(im), int(den))

    @classmethod
    def from_complex(cls, z: complex) -> GaussianRational:
        """Exact conversion of a binary float (every float is a dyadic rational)."""
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError(f"cannot convert non-finite {z!r}")
        return cls(Fraction(z.real), Fraction(z.imag))

    @classmethod
    def coerce(cls, x: object) -> GaussianRational:
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Rational)):
            return cls(Fraction(x))
        if isinstance(x, (float, complex)):
            return cls.from_complex(x)
        raise TypeError(f"cannot interpret {type(x).__name__} as a Gaussian rational")

    @property
    def parts(self) -> tuple[int, int, int]:
        return self._re, self._im, self._den

    @property
    def real(self) -> Fraction:
        return Fraction(self._re, self._den)

    @property
    def imag(self) -> Fraction:
        return Fraction(self._im, self._den)

    @property
    def den(self) -> int:
        return self._den

    def is_gaussian_integer(self) -> bool:
        return self._den == 1

    def abs2(self) -> Fraction:
        """Exact squared modulus."""
        return Fraction(self._re * self._re + self._im * self._im, self._den * self._den)

    def conjugate(self) -> GaussianRational:
        return GaussianRational._raw(self._re, -self._im, self._den)

    def __complex__(self) -> complex:
        return complex(self._re / self._den, self._im / self._den)

    def __bool__(self) -> bool:
        return self._re != 0 or self._im != 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GaussianRational):
            return (self._re, self._im, self._den) == (other._re, other._im, other._den)
        if isinstance(other, (int, Rational)):
            return self._im == 0 and Fraction(self._re, self._den) == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            if self._im == 0:
                self._hash = hash(Fraction(self._re, self._den))
            else:
                self._hash = hash((self._re, self._im, self._den))
        return self._hash

    def __repr__(self) -> str:
        if self._den == 1:
            return f"GaussianRational({self._re}, {self._im})"
        return f"GaussianRational({self._re}/{self._den}, {self._im}/{self._den})"

    def __str__(self) -> str:
        body = f"{self._re}{self._im:+d}i" if self._im else f"{self._re}"
        return body if self._den == 1 else f"({body})/{self._den}"

    def __neg__(self) -> GaussianRational:
        return GaussianRational._raw(-self._re, -self._im, self._den)

    def __pos__(self) -> GaussianRational:
        return self

    def __add__(self, other: GaussianLike) -> GaussianRational:
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        if self._den == o._den:
            return GaussianRational._raw(self._re + o._re, self._im + o._im, self._den)
        return GaussianRational._raw(
            self._re * o._den + o._re * self._den,
            self._im * o._den + o._im * self._den,
            self._den * o._den,
        )

    __radd__ = __add__

    def __sub__(self, other: GaussianLike) -> GaussianRational:
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: GaussianLike) -> GaussianRational:
        return GaussianRational.coerce(other) - self

    def __mul__(self, other: GaussianLike) -> GaussianRational:
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational._raw(
            self._re * o._re - self._im * o._im,
            self._re * o._im + self._im * o._re,
            self._den * o._den,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: GaussianLike) -> GaussianRational:
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        n2 = o._re * o._re + o._im * o._im
        if n2 == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        # (p/d) / (q/e) = p * conj(q) * e / (d * |q|^2)
        re = (self._re * o._re + self._im * o._im) * o._den
        im = (self._im * o._re - self._re * o._im) * o._den
        return GaussianRational._raw(re, im, self._den * n2)

    def __rtruediv__(self, other: GaussianLike) -> GaussianRational:
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int) -> GaussianRational:
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (1 / self) ** (-k)
        result = GaussianRational._raw(1, 0, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result


ZERO = GaussianRational._raw(0, 0, 1)
ONE = GaussianRational._raw(1, 0, 1)
I = GaussianRational._raw(0, 1, 1)
