"""SL_2 computations: unipotent conjugation, first columns, word balls.

Exact elements carry :class:`GaussianRational` entries. Word balls over
Gaussian-integer generators multiply raw integer tuples, which keeps a
length-8 ball over the standard SL_2(Z[i]) generators well under a second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConsistencyError, PreconditionError
from .gaussian import GaussianRational

DET_TOL = 1e-9
CONJ_TOL = 1e-10
ROUND_DIGITS = 9
OVERFLOW = 1e150


@dataclass(frozen=True)
class SL2Element:
    a: Any
    b: Any
    c: Any
    d: Any

    def __post_init__(self) -> None:
        entries = (self.a, self.b, self.c, self.d)
        exact = [isinstance(x, GaussianRational) for x in entries]
        if any(exact) and not all(exact):
            raise PreconditionError("mixed exact and float entries")
        det = self.a * self.d - self.b * self.c
        if all(exact):
            if det != 1:
                raise PreconditionError(f"determinant is {det}, not 1")
        elif not (math.isfinite(abs(complex(det))) and abs(complex(det) - 1) <= DET_TOL * max(1.0, self.scale())):
            raise PreconditionError(f"determinant is {det}, not 1")

    @classmethod
    def exact(cls, a: Any, b: Any, c: Any, d: Any) -> SL2Element:
        return cls(*(GaussianRational.coerce(x) for x in (a, b, c, d)))

    @classmethod
    def of(cls, a: Any, b: Any, c: Any, d: Any) -> SL2Element:
        return cls(*(complex(x) for x in (a, b, c, d)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Any]], exact: bool | None = None) -> SL2Element:
        flat = [rows[0][0], rows[0][1], rows[1][0], rows[1][1]]
        if exact is None:
            exact = not any(isinstance(x, (float, complex)) for x in flat)
        return cls.exact(*flat) if exact else cls.of(*flat)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.a, GaussianRational)

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def scale(self) -> float:
        return max(abs(complex(x)) for x in self.entries)

    def __matmul__(self, o: SL2Element) -> SL2Element:
        return SL2Element(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def inverse(self) -> SL2Element:
        return SL2Element(self.d, -self.b, -self.c, self.a)

    def trace(self) -> Any:
        return self.a + self.d

    def array(self) -> np.ndarray:
        return np.array([[complex(self.a), complex(self.b)], [complex(self.c), complex(self.d)]])

    def rows(self) -> list[list[Any]]:
        return [[self.a, self.b], [self.c, self.d]]

    def close_to(self, o: SL2Element, tol: float) -> bool:
        return all(abs(complex(x - y)) <= tol for x, y in zip(self.entries, o.entries))


def identity(exact: bool = True) -> SL2Element:
    return SL2Element.exact(1, 0, 0, 1) if exact else SL2Element.of(1, 0, 0, 1)


U = SL2Element.exact(1, 1, 0, 1)


def standard_generators_zi() -> list[SL2Element]:
    """Generators of SL_2(Z[i]): two unipotents, the Weyl element, diag(-i, i)."""
    i = GaussianRational(0, 1)
    return [
        SL2Element.exact(1, 1, 0, 1),
        SL2Element.exact(1, i, 0, 1),
        SL2Element.exact(0, -1, 1, 0),
        SL2Element.exact(-i, 0, 0, i),
    ]


def standard_generators_z() -> list[SL2Element]:
    return [SL2Element.exact(0, -1, 1, 0), SL2Element.exact(1, 1, 0, 1)]


@dataclass(frozen=True)
class Conjugation:
    closed_form: SL2Element
    product: SL2Element


def conjugate_unipotent(gamma: SL2Element) -> Conjugation:
    """``gamma u gamma^-1`` with ``u = [[1,1],[0,1]]``, by formula and by multiplication."""
    a, c = gamma.a, gamma.c
    closed = SL2Element(1 - a * c, a * a, -(c * c), 1 + a * c)
    u = U if gamma.is_exact else SL2Element.of(1, 1, 0, 1)
    prod = gamma @ u @ gamma.inverse()
    ok = closed == prod if gamma.is_exact else closed.close_to(prod, CONJ_TOL * max(1.0, gamma.scale()) ** 2)
    if not ok:
        raise ConsistencyError(f"closed form {closed} differs from product {prod}")
    return Conjugation(closed, prod)


def first_column(g: SL2Element) -> tuple[Any, Any]:
    return (g.a, g.c)


def is_unipotent(g: SL2Element) -> bool:
    """Whether ``(g - I)^2 = 0``; the identity counts (see :func:`nontrivial_unipotent`)."""
    a, b, c, d = g.a - 1, g.b, g.c, g.d - 1
    sq = (a * a + b * c, a * b + b * d, c * a + d * c, c * b + d * d)
    if g.is_exact:
        return all(x == 0 for x in sq)
    tol = DET_TOL * max(1.0, g.scale()) ** 2
    return all(abs(complex(x)) <= tol for x in sq)


def nontrivial_unipotent(g: SL2Element) -> bool:
    return is_unipotent(g) and not (
        g == identity(True) if g.is_exact else g.close_to(identity(False), DET_TOL)
    )


# -- word balls ---------------------------------------------------------------


def _psl_normalize_exact(m: tuple) -> tuple:
    for x in m:
        if x:
            if x.real > 0 or (x.real == 0 and x.imag > 0):
                return m
            return tuple(-y for y in m)
    return m


def _psl_normalize_float(m: tuple) -> tuple:
    for x in m:
        if abs(x) > DET_TOL:
            ang = math.atan2(x.imag, x.real)
            if -math.pi / 2 < ang <= math.pi / 2:
                return m
            return tuple(-y for y in m)
    return m


def _int_mul(p: tuple, q: tuple) -> tuple:
    # Matrices as (ar, ai, br, bi, cr, ci, dr, di) over Z[i].
    ar, ai, br, bi, cr, ci, dr, di = p
    er, ei, fr, fi, gr, gi, hr, hi = q
    return (
        ar * er - ai * ei + br * gr - bi * gi,
        ar * ei + ai * er + br * gi + bi * gr,
        ar * fr - ai * fi + br * hr - bi * hi,
        ar * fi + ai * fr + br * hi + bi * hr,
        cr * er - ci * ei + dr * gr - di * gi,
        cr * ei + ci * er + dr * gi + di * gr,
        cr * fr - ci * fi + dr * hr - di * hi,
        cr * fi + ci * fr + dr * hi + di * hr,
    )


def _to_int(g: SL2Element) -> tuple:
    out = []
    for x in g.entries:
        out += [int(x.real), int(x.imag)]
    return tuple(out)


def _from_int(t: tuple) -> SL2Element:
    e = [GaussianRational._raw(t[2 * k], t[2 * k + 1], 1) for k in range(4)]
    return SL2Element(*e)


def _int_psl(t: tuple) -> tuple:
    for k in range(4):
        re, im = t[2 * k], t[2 * k + 1]
        if re or im:
            if re > 0 or (re == 0 and im > 0):
                return t
            return tuple(-x for x in t)
    return t


@dataclass(frozen=True, eq=False)
class GroupBall:
    """Elements of word length at most ``max_word_length``, in shortlex order of their words."""

    generators: tuple[SL2Element, ...]
    elements: tuple[SL2Element, ...]
    words: tuple[tuple[int, ...], ...]
    max_word_length: int
    overflow: tuple[bool, ...] = field(default=())
    psl: bool = False

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def is_exact(self) -> bool:
        return bool(self.elements) and self.elements[0].is_exact


def _close_under_inverses(gens: Sequence[SL2Element]) -> list[SL2Element]:
    out = list(gens)
    for g in gens:
        inv = g.inverse()
        if g.is_exact:
            present = any(inv == h for h in out)
        else:
            present = any(inv.close_to(h, DET_TOL) for h in out)
        if not present:
            out.append(inv)
    return out


def enumerate_ball(
    generators: Iterable[SL2Element],
    L: int,
    *,
    add_inverses: bool = True,
    psl: bool = False,
) -> GroupBall:
    """Breadth-first closure over words of length at most ``L``.

    Generators are tried in the order given (inverses appended), so the first
    word reaching an element is its shortlex-minimal representative.
    """
    if L < 0:
        raise PreconditionError("word length must be nonnegative")
    gens = list(generators)
    if not gens:
        raise PreconditionError("need at least one generator")
    exact = gens[0].is_exact
    if any(g.is_exact != exact for g in gens):
        raise PreconditionError("generators mix exact and float entries")
    if add_inverses:
        gens = _close_under_inverses(gens)

    if exact and all(x.is_gaussian_integer() for g in gens for x in g.entries):
        norm = _int_psl if psl else (lambda t: t)
        gi = [_to_int(g) for g in gens]
        start = norm(_to_int(identity(True)))
        seen = {start: ()}
        layer = [start]
        for _ in range(L):
            nxt = []
            for t in layer:
                w = seen[t]
                for k, q in enumerate(gi):
                    r = norm(_int_mul(t, q))
                    if r not in seen:
                        seen[r] = w + (k,)
                        nxt.append(r)
            layer = nxt
        items = list(seen.items())
        return GroupBall(
            tuple(gens),
            tuple(_from_int(t) for t, _ in items),
            tuple(w for _, w in items),
            L,
            tuple(False for _ in items),
            psl,
        )

    if exact:
        norm = _psl_normalize_exact if psl else (lambda m: m)
        ident = norm(identity(True).entries)
        seen_e: dict[tuple, tuple[int, ...]] = {ident: ()}
        layer = [ident]
        for _ in range(L):
            nxt = []
            for m in layer:
                w = seen_e[m]
                for k, g in enumerate(gens):
                    r = norm((SL2Element(*m) @ g).entries)
                    if r not in seen_e:
                        seen_e[r] = w + (k,)
                        nxt.append(r)
            layer = nxt
        items = list(seen_e.items())
        return GroupBall(
            tuple(gens),
            tuple(SL2Element(*m) for m, _ in items),
            tuple(w for _, w in items),
            L,
            tuple(False for _ in items),
            psl,
        )

    return _float_ball(gens, L, psl)


def _float_ball(gens: list[SL2Element], L: int, psl: bool) -> GroupBall:
    norm = _psl_normalize_float if psl else (lambda m: m)
    ga = [g.array() for g in gens]

    def key(m: tuple) -> tuple:
        return tuple(v for x in m for v in (round(x.real, ROUND_DIGITS), round(x.imag, ROUND_DIGITS)))

    buckets: dict[tuple, list[int]] = {}
    mats: list[tuple] = []
    words: list[tuple[int, ...]] = []
    flags: list[bool] = []

    def insert(m: tuple, w: tuple[int, ...], bad: bool) -> bool:
        k = key(m)
        for idx in buckets.get(k, ()):
            if max(abs(x - y) for x, y in zip(m, mats[idx])) <= 10.0 ** -ROUND_DIGITS:
                return False
        buckets.setdefault(k, []).append(len(mats))
        mats.append(m)
        words.append(w)
        flags.append(bad)
        return True

    insert(norm((1 + 0j, 0j, 0j, 1 + 0j)), (), False)
    layer = [0]
    for _ in range(L):
        nxt = []
        for idx in layer:
            if flags[idx]:
                continue
            A = np.array(mats[idx]).reshape(2, 2)
            for k, G in enumerate(ga):
                with np.errstate(all="ignore"):
                    P = A @ G
                m = norm(tuple(complex(x) for x in P.ravel()))
                bad = not all(math.isfinite(abs(x)) and abs(x) < OVERFLOW for x in m)
                if insert(m, words[idx] + (k,), bad):
                    nxt.append(len(mats) - 1)
        layer = nxt

    elements = []
    for m, bad in zip(mats, flags):
        if bad:
            # Keep the slot so words and flags line up; the entries are unusable.
            obj = SL2Element.__new__(SL2Element)
            for name, v in zip("abcd", m):
                object.__setattr__(obj, name, v)
            elements.append(obj)
        else:
            elements.append(SL2Element(*m))
    return GroupBall(tuple(gens), tuple(elements), tuple(words), L, tuple(flags), psl)


# -- projection discreteness --------------------------------------------------


@dataclass(frozen=True)
class ProjectionReport:
    min_separation: float
    count: int
    min_separation_sq: Fraction | float = math.inf
    columns: tuple = ()
    nn_distances: tuple = ()

    def to_csv(self) -> str:
        lines = ["norm,nn_distance"]
        for col, d in zip(self.columns, self.nn_distances):
            nrm = math.sqrt(sum(abs(complex(x)) ** 2 for x in col))
            lines.append(f"{nrm:.12g},{d:.12g}")
        return "\n".join(lines) + "\n"


def _exact_dist2(p: tuple, q: tuple) -> Fraction:
    return sum(((x - y).abs2() for x, y in zip(p, q)), Fraction(0))


def projection_discreteness(ball: GroupBall, radius: float) -> ProjectionReport:
    """Distinct first columns of norm at most ``radius`` and their minimal separation.

    Candidate close pairs come from a KD-tree; in exact mode their distances
    are then recomputed exactly, and Gaussian-integer columns must be at
    least 1 apart.
    """
    usable = [g for g, bad in zip(ball.elements, ball.overflow or [False] * len(ball)) if not bad]
    exact = bool(usable) and usable[0].is_exact
    if exact:
        r2 = Fraction(radius) ** 2
        cols = sorted(
            {first_column(g) for g in usable if first_column(g)[0].abs2() + first_column(g)[1].abs2() <= r2},
            key=lambda col: tuple(v for x in col for v in (x.real, x.imag)),
        )
    else:
        raw = [first_column(g) for g in usable]
        raw = [c for c in raw if math.hypot(abs(c[0]), abs(c[1])) <= radius]
        arr = np.array(raw, dtype=complex).reshape(-1, 2)
        keep: list[int] = []
        if len(arr):
            real = np.concatenate([arr.real, arr.imag], axis=1)
            tree = cKDTree(real)
            dropped = set()
            for i in range(len(arr)):
                if i in dropped:
                    continue
                keep.append(i)
                for j in tree.query_ball_point(real[i], 10.0 ** -ROUND_DIGITS):
                    if j > i:
                        dropped.add(j)
        cols = [raw[i] for i in keep]
    count = len(cols)
    if count < 2:
        return ProjectionReport(math.inf, count, math.inf, tuple(cols), tuple(math.inf for _ in cols))

    arr = np.array([[complex(x) for x in c] for c in cols])
    real = np.concatenate([arr.real, arr.imag], axis=1)
    tree = cKDTree(real)
    dist, idx = tree.query(real, k=2)
    nn = dist[:, 1]
    if not exact:
        d = float(nn.min())
        return ProjectionReport(d, count, d * d, tuple(cols), tuple(float(x) for x in nn))

    # Every pair within a safety margin of the float minimum is re-measured exactly.
    cutoff = float(nn.min()) * (1 + 1e-6) + 1e-9
    pairs = tree.query_pairs(cutoff)
    best = min(_exact_dist2(cols[i], cols[j]) for i, j in pairs) if pairs else Fraction(int(math.ceil(cutoff**2)) + 1)
    if all(x.is_gaussian_integer() for c in cols for x in c) and best < 1:
        raise ConsistencyError(f"distinct Gaussian-integer columns at squared distance {best}")
    return ProjectionReport(math.sqrt(best), count, best, tuple(cols), tuple(float(x) for x in nn))


def random_exact_sl2(rng: np.random.Generator, bound: int = 12, den: int = 12) -> SL2Element:
    """Random det-1 matrix with Gaussian-rational entries, built as a product of elementary factors."""

    def rnd() -> GaussianRational:
        return GaussianRational(
            Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, den + 1))),
            Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, den + 1))),
        )

    while True:
        a = rnd()
        if a:
            break
    x, y = rnd(), rnd()
    # [[a,0],[0,1/a]] [[1,x],[0,1]] [[1,0],[y,1]]
    D = SL2Element(a, GaussianRational(0), GaussianRational(0), 1 / a)
    return D @ SL2Element.exact(1, x, 0, 1) @ SL2Element.exact(1, 0, y, 1)
