"""Classical root systems, the (H, I) subgroup pair and ad-nilpotent spanning families.

Everything is exact: roots are integer vectors, matrices hold ints or
Fractions, and ranks come from fraction row reduction. Family A is realized
in sl_{n+1}; B, C and D are realized in so_{2n+1}, sp_{2n} and so_{2n}
with the Cartan subalgebra diagonal, so each root vector is the projection
of a matrix unit of the right weight.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from ._exact import nullspace, primitive_integer_vector, rank, solve_left
from .errors import ConsistencyError, PreconditionError

Root = tuple[int, ...]
MIN_RANK = {"A": 1, "B": 2, "C": 2, "D": 3}
NILPOTENT_TOL = 1e-8


def _lex_positive(v: Sequence[int]) -> bool:
    for x in v:
        if x:
            return x > 0
    return False


def _unit(n: int, i: int, c: int = 1) -> list[int]:
    v = [0] * n
    v[i] = c
    return v


def _all_roots(family: str, n: int) -> list[Root]:
    roots: set[Root] = set()
    if family == "A":
        for i, j in itertools.permutations(range(n + 1), 2):
            v = [0] * (n + 1)
            v[i], v[j] = 1, -1
            roots.add(tuple(v))
        return sorted(roots)
    for i, j in itertools.combinations(range(n), 2):
        for si, sj in itertools.product((1, -1), repeat=2):
            v = [0] * n
            v[i], v[j] = si, sj
            roots.add(tuple(v))
    for i in range(n):
        for s in (1, -1):
            if family == "B":
                roots.add(tuple(_unit(n, i, s)))
            elif family == "C":
                roots.add(tuple(_unit(n, i, 2 * s)))
    return sorted(roots)


def _classical_simple(family: str, n: int) -> list[Root]:
    width = n + 1 if family == "A" else n
    simple = []
    for i in range(n if family == "A" else n - 1):
        v = [0] * width
        v[i], v[i + 1] = 1, -1
        simple.append(tuple(v))
    if family == "B":
        simple.append(tuple(_unit(n, n - 1)))
    elif family == "C":
        simple.append(tuple(_unit(n, n - 1, 2)))
    elif family == "D":
        v = [0] * n
        v[n - 2], v[n - 1] = 1, 1
        simple.append(tuple(v))
    return simple


@dataclass(frozen=True)
class RootSystem:
    family: str
    rank: int
    simple_roots: tuple[Root, ...]
    positive_roots: tuple[Root, ...]

    @property
    def ambient_dim(self) -> int:
        return len(self.simple_roots[0])

    @property
    def lie_dim(self) -> int:
        """Dimension of the simple Lie algebra: rank plus twice the positive roots."""
        return self.rank + 2 * len(self.positive_roots)

    def coefficients(self, v: Sequence[int]) -> tuple[Fraction, ...]:
        """Coordinates of a root in the basis of simple roots."""
        c = solve_left(self.simple_roots, v)
        if c is None:
            raise PreconditionError(f"{tuple(v)} is not in the root lattice span")
        return tuple(c)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "rank": self.rank,
            "simple_roots": [list(v) for v in self.simple_roots],
            "positive_roots": [list(v) for v in self.positive_roots],
        }


def build_root_system(family: str, rank: int) -> RootSystem:
    """Standard coordinate realization with lexicographic positivity."""
    family = family.upper()
    if family not in MIN_RANK:
        raise PreconditionError(f"unknown family {family!r}")
    if rank < MIN_RANK[family]:
        raise PreconditionError(f"{family}_{rank}: rank must be at least {MIN_RANK[family]}")
    positive = [v for v in _all_roots(family, rank) if _lex_positive(v)]
    positive.sort(key=lambda v: tuple(-x for x in v))
    RS = RootSystem(family, rank, tuple(_classical_simple(family, rank)), tuple(positive))
    for v in positive:
        if any(c < 0 or c.denominator != 1 for c in RS.coefficients(v)):
            raise ConsistencyError(f"positive root {v} is not a nonnegative integer combination")
    return RS


def delta_alpha_plus(RS: RootSystem, alpha: int) -> list[Root]:
    """Positive roots with zero coefficient on the simple root ``alpha``."""
    if not (0 <= alpha < RS.rank):
        raise PreconditionError(f"simple root index {alpha} out of range")
    return [v for v in RS.positive_roots if RS.coefficients(v)[alpha] == 0]


Label = tuple[str, tuple]


@dataclass(frozen=True)
class SubgroupPairBasis:
    """Labels spanning Lie(H) and Lie(I).

    A label is ``("t", h)`` for a Cartan direction ``h``, ``("e", v)`` for the
    root space of ``v`` and ``("f", v)`` for that of ``-v``.
    """

    alpha: int
    beta: int
    lieH_labels: tuple[Label, ...]
    lieI_labels: tuple[Label, ...]

    def counts(self) -> dict[str, dict[str, int]]:
        out = {}
        for name, labels in (("H", self.lieH_labels), ("I", self.lieI_labels)):
            out[name] = {k: sum(1 for l in labels if l[0] == k) for k in "tef"}
        return out

    def to_json(self) -> dict:
        def enc(labels):
            return [{"kind": k, "vector": [str(x) for x in v]} for k, v in labels]

        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "lieH": enc(self.lieH_labels),
            "lieI": enc(self.lieI_labels),
        }


def _cartan_constraints(RS: RootSystem) -> list[list[int]]:
    # Family A lives on trace-zero diagonals of C^{n+1}; the others on C^n.
    return [[1] * RS.ambient_dim] if RS.family == "A" else []


def torus_kernel(RS: RootSystem, alpha: int) -> list[tuple[int, ...]]:
    """Integer basis of the kernel of a simple root on the Cartan subalgebra."""
    rows = [list(RS.simple_roots[alpha])] + _cartan_constraints(RS)
    return [tuple(primitive_integer_vector(v)) for v in nullspace(rows)]


def build_pair(RS: RootSystem, alpha: int, beta: int) -> SubgroupPairBasis:
    if RS.rank < 2:
        raise PreconditionError("rank 1 has a single simple root; the pair needs two")
    for x in (alpha, beta):
        if not (0 <= x < RS.rank):
            raise PreconditionError(f"simple root index {x} out of range")
    if alpha == beta:
        raise PreconditionError("alpha and beta must be distinct simple roots")
    da = delta_alpha_plus(RS, alpha)
    db = delta_alpha_plus(RS, beta)
    H = (
        [("t", h) for h in torus_kernel(RS, alpha)]
        + [("e", v) for v in RS.positive_roots]
        + [("f", v) for v in da]
    )
    I = (
        [("t", h) for h in torus_kernel(RS, beta)]
        + [("e", v) for v in db]
        + [("f", v) for v in RS.positive_roots]
    )
    return SubgroupPairBasis(alpha, beta, tuple(H), tuple(I))


# -- matrix realizations ------------------------------------------------------


def _form(RS: RootSystem) -> np.ndarray | None:
    n = RS.rank
    I = np.eye(n, dtype=int)
    Z = np.zeros((n, n), dtype=int)
    if RS.family == "B":
        M = np.zeros((2 * n + 1, 2 * n + 1), dtype=int)
        M[:n, n : 2 * n] = I
        M[n : 2 * n, :n] = I
        M[2 * n, 2 * n] = 1
        return M
    if RS.family == "C":
        return np.block([[Z, I], [-I, Z]])
    if RS.family == "D":
        return np.block([[Z, I], [I, Z]])
    return None


def _diagonal_weights(RS: RootSystem) -> list[tuple[int, ...]]:
    """Weight of each standard basis vector, as a linear form in root coordinates."""
    width = RS.ambient_dim
    if RS.family == "A":
        return [tuple(_unit(width, i)) for i in range(width)]
    w = [tuple(_unit(width, i)) for i in range(width)]
    w += [tuple(_unit(width, i, -1)) for i in range(width)]
    if RS.family == "B":
        w.append(tuple([0] * width))
    return w


@dataclass(frozen=True)
class Realization:
    """Exact matrix model of a simple Lie algebra with diagonal Cartan."""

    RS: RootSystem
    size: int
    form: np.ndarray | None
    weights: tuple[tuple[int, ...], ...]
    _root_vectors: dict = field(default_factory=dict, repr=False, compare=False)

    def project(self, X: np.ndarray) -> np.ndarray:
        if self.form is None:
            return X - np.eye(self.size, dtype=int) * (np.trace(X) // self.size)
        Minv = np.linalg.inv(self.form).round().astype(int)
        return X - Minv @ X.T @ self.form

    def cartan(self, h: Sequence[int]) -> np.ndarray:
        return np.diag([sum(a * b for a, b in zip(w, h)) for w in self.weights]).astype(object)

    def root_vector(self, v: Root) -> np.ndarray:
        X = self._root_vectors.get(v)
        if X is not None:
            return X
        for a, b in itertools.product(range(self.size), repeat=2):
            if a != b and tuple(x - y for x, y in zip(self.weights[a], self.weights[b])) == v:
                E = np.zeros((self.size, self.size), dtype=int)
                E[a, b] = 1
                X = self.project(E)
                if np.any(X):
                    self._root_vectors[v] = X.astype(object)
                    return self._root_vectors[v]
        raise ConsistencyError(f"no root vector of weight {v} in the realization")

    def realize(self, label: Label) -> np.ndarray:
        kind, v = label
        if kind == "t":
            return self.cartan(v)
        if kind == "e":
            return self.root_vector(tuple(v))
        if kind == "f":
            return self.root_vector(tuple(-x for x in v))
        raise PreconditionError(f"unknown label kind {kind!r}")

    def self_check(self, seed: int = 0x5EED) -> None:
        """Each root vector lies in the algebra and is an eigenvector of the Cartan."""
        rng = np.random.default_rng(seed)
        h = [int(x) for x in rng.integers(-9, 10, size=self.RS.ambient_dim)]
        H = self.cartan(h)
        for v in self.RS.positive_roots:
            for w in (v, tuple(-x for x in v)):
                X = self.root_vector(w)
                eig = sum(a * b for a, b in zip(w, h))
                if np.any(H @ X - X @ H - eig * X):
                    raise ConsistencyError(f"[h, X] != v(h) X for root {w}")
                if self.form is not None and np.any(X.T @ self.form + self.form @ X):
                    raise ConsistencyError(f"root vector {w} leaves the algebra")


def realization(RS: RootSystem) -> Realization:
    form = _form(RS)
    weights = tuple(_diagonal_weights(RS))
    R = Realization(RS, len(weights), form, weights)
    R.self_check()
    return R


@dataclass(frozen=True)
class SpanReport:
    dim_sum: int
    dim_g: int
    spans: bool


def verify_spanning(pair: SubgroupPairBasis, RS: RootSystem) -> SpanReport:
    """Rank of Lie(H) + Lie(I) inside the matrix realization."""
    R = realization(RS)
    rows = [R.realize(l).ravel().tolist() for l in pair.lieH_labels + pair.lieI_labels]
    r = rank(rows) if rows else 0
    return SpanReport(r, RS.lie_dim, r == RS.lie_dim)


# -- nilpotency in sl_n -------------------------------------------------------


def _is_exact_entry(x: Any) -> bool:
    return isinstance(x, (int, Fraction, np.integer))


@dataclass(frozen=True, eq=False)
class LieElement:
    """Traceless n x n matrix, exact (int/Fraction) or float/complex."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        M = np.asarray(self.matrix)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise PreconditionError("Lie elements are square matrices")
        exact = M.dtype == object or np.issubdtype(M.dtype, np.integer)
        if exact:
            M = np.array([[Fraction(x) if not _is_exact_entry(x) else x for x in row] for row in M.tolist()], dtype=object)
            if sum(M[i, i] for i in range(M.shape[0])) != 0:
                raise PreconditionError("trace must vanish")
        else:
            M = M.astype(complex)
            if abs(np.trace(M)) > 1e-12 * max(1.0, float(np.abs(M).max())):
                raise PreconditionError("trace must vanish")
        object.__setattr__(self, "matrix", M)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.matrix.dtype == object


def _sl_coords(Y: np.ndarray) -> list:
    """Coordinates of a traceless matrix in the basis E_ij (i != j), then H_i."""
    n = Y.shape[0]
    off = [Y[i, j] for i in range(n) for j in range(n) if i != j]
    diag = list(itertools.accumulate(Y[i, i] for i in range(n - 1)))
    return off + diag


def sl_basis(n: int) -> list[np.ndarray]:
    basis = []
    for i in range(n):
        for j in range(n):
            if i != j:
                E = np.zeros((n, n), dtype=object)
                E[:] = 0
                E[i, j] = 1
                basis.append(E)
    for i in range(n - 1):
        H = np.zeros((n, n), dtype=object)
        H[:] = 0
        H[i, i], H[i + 1, i + 1] = 1, -1
        basis.append(H)
    return basis


def ad_matrix(v: LieElement) -> np.ndarray:
    """Matrix of ad(v) on the standard basis of sl_n (columns are images)."""
    V = v.matrix
    cols = [_sl_coords(V @ B - B @ V) for B in sl_basis(v.n)]
    return np.array(cols, dtype=object if v.is_exact else complex).T


def ad_nilpotent(v: LieElement) -> bool:
    """Whether ad(v)^(2n) vanishes (exactly, or to 1e-8 after normalization)."""
    A = ad_matrix(v)
    if v.is_exact:
        P = A
        for _ in range(2 * v.n - 1):
            P = P @ A
        return not any(x != 0 for x in P.ravel())
    scale = float(np.abs(A).max())
    if scale == 0:
        return True
    P = np.linalg.matrix_power(A / scale, 2 * v.n)
    return float(np.abs(P).max()) <= NILPOTENT_TOL


def nilcone_spanning_family(n: int) -> list[LieElement]:
    """Ad-nilpotent elements spanning sl_n: the E_ij and n-1 rank-one elements."""
    if n < 2:
        raise PreconditionError("n must be at least 2")
    fam = [LieElement(B) for B in sl_basis(n)[: n * (n - 1)]]
    for i in range(n - 1):
        M = np.zeros((n, n), dtype=object)
        M[:] = 0
        M[i, i], M[i + 1, i + 1] = 1, -1
        M[i, i + 1], M[i + 1, i] = 1, -1
        fam.append(LieElement(M))
    return fam


def family_rank(family: Sequence[LieElement]) -> int:
    return rank([e.matrix.ravel().tolist() for e in family])
