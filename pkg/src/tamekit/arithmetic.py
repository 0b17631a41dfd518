"""Imaginary quadratic fields of class number one and denominator bounds.

Numbers are stored in the integral basis ``(1, w)`` with rational
coordinates, where ``w = sqrt(-d)`` for ``d = 1, 2`` and ``w = (1 + sqrt(-d))/2``
for ``d = 3, 7, 11``. A number is an algebraic integer exactly when both
coordinates are integers, which makes integrality checks plain denominator
checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from scipy.spatial import cKDTree
import numpy as np

from .errors import ConsistencyError, PreconditionError
from .gaussian import GaussianRational

SUPPORTED_D = (1, 2, 3, 7, 11)
SEARCH_BOX = 3


def _check_d(d: int) -> None:
    if d not in SUPPORTED_D:
        raise PreconditionError(f"d={d} is not one of the supported rings {SUPPORTED_D}")


def omega_square(d: int) -> tuple[Fraction, Fraction]:
    """``(p, q)`` with ``w**2 = p + q*w``."""
    if d % 4 == 3:
        return Fraction(-(1 + d), 4), Fraction(1)
    return Fraction(-d), Fraction(0)


@dataclass(frozen=True)
class QuadraticNumber:
    """``x + y*w`` in the field Q(sqrt(-d))."""

    d: int
    x: Fraction
    y: Fraction

    def __post_init__(self) -> None:
        _check_d(self.d)
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    @classmethod
    def integer(cls, d: int, x: int, y: int = 0) -> QuadraticNumber:
        if not (isinstance(x, int) and isinstance(y, int)):
            raise PreconditionError("integer coordinates required")
        return cls(d, Fraction(x), Fraction(y))

    @classmethod
    def from_gaussian(cls, z: GaussianRational) -> QuadraticNumber:
        return cls(1, z.real, z.imag)

    def _lift(self, other: Any) -> QuadraticNumber:
        if isinstance(other, QuadraticNumber):
            if other.d != self.d:
                raise PreconditionError("numbers from different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticNumber(self.d, Fraction(other), Fraction(0))
        return NotImplemented

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def denominator(self) -> int:
        """Smallest positive n with n*self integral."""
        return math.lcm(self.x.denominator, self.y.denominator)

    def norm(self) -> Fraction:
        p, q = omega_square(self.d)
        # N(x + y w) = x^2 + q x y - p y^2
        return self.x * self.x + q * self.x * self.y - p * self.y * self.y

    def conjugate(self) -> QuadraticNumber:
        if self.d % 4 == 3:
            return QuadraticNumber(self.d, self.x + self.y, -self.y)
        return QuadraticNumber(self.d, self.x, -self.y)

    def embed(self) -> complex:
        return complex(self.x) + complex(self.y) * omega(self.d)

    def __bool__(self) -> bool:
        return bool(self.x) or bool(self.y)

    def __neg__(self) -> QuadraticNumber:
        return QuadraticNumber(self.d, -self.x, -self.y)

    def __add__(self, other: Any) -> QuadraticNumber:
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QuadraticNumber(self.d, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __sub__(self, other: Any) -> QuadraticNumber:
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QuadraticNumber(self.d, self.x - o.x, self.y - o.y)

    def __rsub__(self, other: Any) -> QuadraticNumber:
        return (-self) + other

    def __mul__(self, other: Any) -> QuadraticNumber:
        o = self._lift(other)
        if o is NotImplemented:
            return o
        p, q = omega_square(self.d)
        yy = self.y * o.y
        return QuadraticNumber(self.d, self.x * o.x + p * yy, self.x * o.y + self.y * o.x + q * yy)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> QuadraticNumber:
        o = self._lift(other)
        if o is NotImplemented:
            return o
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        c = self * o.conjugate()
        return QuadraticNumber(self.d, c.x / n, c.y / n)

    def __pow__(self, k: int) -> QuadraticNumber:
        if k < 0:
            return (QuadraticNumber(self.d, Fraction(1), Fraction(0)) / self) ** (-k)
        out = QuadraticNumber(self.d, Fraction(1), Fraction(0))
        for _ in range(k):
            out = out * self
        return out

    def to_json(self) -> list[str]:
        return [str(self.x), str(self.y)]


def omega(d: int) -> complex:
    _check_d(d)
    r = math.sqrt(d)
    return complex(0.5, r / 2) if d % 4 == 3 else complex(0, r)


def embed(z: QuadraticNumber) -> complex:
    """The complex embedding ``x + y*w``."""
    return z.embed()


@dataclass(frozen=True)
class NormWitness:
    min_norm: Fraction
    min_abs: float
    witness: QuadraticNumber


def min_nonzero_norm(d: int, box: int = SEARCH_BOX) -> NormWitness:
    """Smallest |z| over nonzero ring elements with coordinates in ``[-box, box]``."""
    _check_d(d)
    best: tuple[Fraction, QuadraticNumber] | None = None
    for x, y in itertools.product(range(-box, box + 1), repeat=2):
        if x == 0 and y == 0:
            continue
        z = QuadraticNumber.integer(d, x, y)
        n = z.norm()
        if best is None or n < best[0]:
            best = (n, z)
    assert best is not None
    return NormWitness(best[0], math.sqrt(best[0]), best[1])


Monomial = tuple[int, ...]


@dataclass(frozen=True)
class PolyMapOverK:
    """Polynomial map ``K^n -> K^m``; each component maps exponent tuples to coefficients."""

    d: int
    n_vars: int
    components: tuple[Mapping[Monomial, QuadraticNumber], ...]

    def __post_init__(self) -> None:
        _check_d(self.d)
        for comp in self.components:
            for mono, c in comp.items():
                if len(mono) != self.n_vars or any(e < 0 for e in mono):
                    raise PreconditionError(f"bad monomial {mono}")
                if not isinstance(c, QuadraticNumber) or c.d != self.d:
                    raise PreconditionError("coefficients must lie in the same field")

    @classmethod
    def from_terms(
        cls, d: int, n_vars: int, components: Iterable[Iterable[tuple[Monomial, Any]]]
    ) -> PolyMapOverK:
        """Build from ``(monomial, coefficient)`` pairs; a coefficient may be a
        QuadraticNumber, an int/Fraction, or ``(numerator_x, numerator_y, den)``."""
        comps = []
        for terms in components:
            comp: dict[Monomial, QuadraticNumber] = {}
            for mono, c in terms:
                if isinstance(c, tuple):
                    nx, ny, den = c
                    if den <= 0:
                        raise PreconditionError("denominators must be positive")
                    c = QuadraticNumber(d, Fraction(nx, den), Fraction(ny, den))
                elif not isinstance(c, QuadraticNumber):
                    c = QuadraticNumber(d, Fraction(c), Fraction(0))
                comp[tuple(mono)] = comp.get(tuple(mono), QuadraticNumber(d, 0, 0)) + c
            comps.append(comp)
        return cls(d, n_vars, tuple(comps))

    @property
    def n_out(self) -> int:
        return len(self.components)

    def __call__(self, x: Sequence[QuadraticNumber]) -> tuple[QuadraticNumber, ...]:
        if len(x) != self.n_vars:
            raise PreconditionError("wrong number of inputs")
        zero = QuadraticNumber(self.d, 0, 0)
        out = []
        for comp in self.components:
            acc = zero
            for mono, c in comp.items():
                term = c
                for xi, e in zip(x, mono):
                    if e:
                        term = term * xi**e
                acc = acc + term
            out.append(acc)
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n_vars": self.n_vars,
            "components": [
                [{"monomial": list(m), "coeff": c.to_json()} for m, c in sorted(comp.items())]
                for comp in self.components
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> PolyMapOverK:
        d = int(data["d"])
        comps = [
            [(tuple(t["monomial"]), QuadraticNumber(d, Fraction(t["coeff"][0]), Fraction(t["coeff"][1]))) for t in comp]
            for comp in data["components"]
        ]
        return cls.from_terms(d, int(data["n_vars"]), comps)


def lcm_denominators(P: PolyMapOverK) -> int:
    """Least N with N times every coefficient integral."""
    N = 1
    for comp in P.components:
        for c in comp.values():
            N = math.lcm(N, c.denominator())
    return N


@dataclass(frozen=True)
class IntegralityReport:
    N: int
    checked: int
    failures: int
    min_separation: float = math.inf

    @property
    def ok(self) -> bool:
        return self.failures == 0


def integrality_certificate(P: PolyMapOverK, inputs: Iterable[Sequence[QuadraticNumber]]) -> IntegralityReport:
    """Check that N * P(x) is integral at each integral input."""
    N = lcm_denominators(P)
    checked = failures = 0
    for x in inputs:
        if not all(v.is_integral() for v in x):
            raise PreconditionError("inputs must be ring integers")
        checked += 1
        if not all((N * v).is_integral() for v in P(x)):
            failures += 1
    return IntegralityReport(N, checked, failures)


def first_column_map(d: int = 1, scale: Fraction | int = 1) -> PolyMapOverK:
    """``(a, b, c, d) -> scale * (a, c)`` on the entries of a 2x2 matrix."""
    s = Fraction(scale)
    return PolyMapOverK.from_terms(d, 4, [[((1, 0, 0, 0), s)], [((0, 0, 1, 0), s)]])


def _exact_min_separation(images: Sequence[tuple[QuadraticNumber, ...]]) -> float:
    if len(images) < 2:
        return math.inf
    arr = np.array([[v.embed() for v in img] for img in images])
    real = np.concatenate([arr.real, arr.imag], axis=1)
    tree = cKDTree(real)
    dist, _ = tree.query(real, k=2)
    cutoff = float(dist[:, 1].min()) * (1 + 1e-6) + 1e-9
    best = min(
        sum(((a - b).norm() for a, b in zip(images[i], images[j])), Fraction(0))
        for i, j in tree.query_pairs(cutoff)
    )
    return math.sqrt(best)


def matrix_group_ball_integrality(ball: Any, quotient: PolyMapOverK) -> IntegralityReport:
    """Apply a quotient map to every element of an exact ball over Z[i].

    Raises if some scaled image is not integral, which would contradict the
    denominator bound. Also reports the separation of the distinct images.
    """
    if quotient.d != 1:
        raise PreconditionError("word balls carry Gaussian entries, so the field must be Q(i)")
    N = lcm_denominators(quotient)
    images = set()
    checked = 0
    for g in ball.elements:
        if not g.is_exact:
            raise PreconditionError("ball entries must be exact")
        x = [QuadraticNumber.from_gaussian(v) for v in g.entries]
        if not all(v.is_integral() for v in x):
            raise PreconditionError("ball entries must be Gaussian integers")
        img = quotient(x)
        checked += 1
        if not all((N * v).is_integral() for v in img):
            raise ConsistencyError(f"N*P({g}) is not integral with N={N}")
        images.add(img)
    ordered = sorted(images, key=lambda t: tuple((v.x, v.y) for v in t))
    return IntegralityReport(N, checked, 0, _exact_min_separation(ordered))
