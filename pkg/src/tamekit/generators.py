"""Set-level constructions: the two-projection partition, the torus split and
a discrete set in a complex torus whose projections along every surjective
character map are dense.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from ._exact import nullspace, primitive_integer_vector, rank
from .core import AmbientSpace, DiscreteSet, Point, min_pairwise_distance, rho_affine, rho_values
from .errors import ConsistencyError, PreconditionError
from .nevanlinna import ThresholdSequence, check_threshold_condition

PROXIMITY_EPS = 1e-3
TARGETS_CHECKED = 10


# -- two projections ----------------------------------------------------------


@dataclass(frozen=True)
class ProjectionPair:
    """Two projections with exhaustion functions on their targets.

    The exhaustion on the source is ``rho1(pi1(x)) + rho2(pi2(x))``.
    """

    pi1: Callable[[np.ndarray], Any]
    pi2: Callable[[np.ndarray], Any]
    rho1: Callable[[Any], float]
    rho2: Callable[[Any], float]
    label: str = ""


def coordinate_projection(indices: int | Sequence[int]) -> Callable[[np.ndarray], np.ndarray]:
    idx = [indices] if isinstance(indices, int) else list(indices)

    def pi(x: np.ndarray) -> np.ndarray:
        return np.asarray(x).ravel()[idx]

    pi.indices = tuple(idx)  # type: ignore[attr-defined]
    return pi


def coordinate_pair(i: Sequence[int] | int, j: Sequence[int] | int) -> ProjectionPair:
    """Coordinate projections of affine space with the affine exhaustion on each target."""
    return ProjectionPair(coordinate_projection(i), coordinate_projection(j), rho_affine, rho_affine, f"coord:{i}|coord:{j}")


@dataclass(frozen=True)
class TwoTamePartition:
    D1: DiscreteSet
    D2: DiscreteSet
    indices1: tuple[int, ...]
    indices2: tuple[int, ...]
    rho1: tuple[float, ...]
    rho2: tuple[float, ...]
    certificate: bool

    def disjoint_union_ok(self, n: int) -> bool:
        a, b = set(self.indices1), set(self.indices2)
        return not (a & b) and a | b == set(range(n))


def partition_two_tame(D: DiscreteSet, pp: ProjectionPair) -> TwoTamePartition:
    """Split by which summand of the exhaustion dominates.

    Ties go to the first part. The factor bounds ``rho <= 2 rho1`` on the first
    part and ``rho < 2 rho2`` on the second are verified in exact rational
    arithmetic on the computed float values.
    """
    r1 = [float(pp.rho1(pp.pi1(p.array()))) for p in D.points]
    r2 = [float(pp.rho2(pp.pi2(p.array()))) for p in D.points]
    i1 = tuple(k for k in range(len(D)) if r1[k] >= r2[k])
    i2 = tuple(k for k in range(len(D)) if r1[k] < r2[k])
    ok = True
    for k in i1:
        ok &= Fraction(r1[k]) + Fraction(r2[k]) <= 2 * Fraction(r1[k])
    for k in i2:
        ok &= Fraction(r1[k]) + Fraction(r2[k]) < 2 * Fraction(r2[k])
    if not ok:
        raise ConsistencyError("factor bound failed on a partition member")
    return TwoTamePartition(D.subset(i1, "D1"), D.subset(i2, "D2"), i1, i2, tuple(r1), tuple(r2), ok)


@dataclass(frozen=True)
class TorusSplit:
    prime: tuple[int, ...]
    double_prime: tuple[int, ...]
    certificate: bool
    r_separation: float
    s_separation: float


def torus_split(
    factors: Sequence[tuple[Any, Any]],
    rho_R: Callable[[Any], float],
    rho_S: Callable[[Any], float],
) -> TorusSplit:
    """Split points given as products ``a_k b_k`` by comparing ``rho_R(a_k)`` with ``rho_S(b_k)``.

    The second part satisfies ``rho_S(b) >= (rho_R(a) + rho_S(b)) / 2`` (checked
    exactly). Separations of the R-factors of the first part and of the
    S-factors of the second part are reported as the finite stand-in for
    discreteness.
    """
    ra, sb = [], []
    for item in factors:
        if item is None or len(item) != 2 or item[0] is None or item[1] is None:
            raise PreconditionError("every point needs its (a, b) factorization")
        ra.append(float(rho_R(item[0])))
        sb.append(float(rho_S(item[1])))
    prime = tuple(k for k in range(len(factors)) if ra[k] > sb[k])
    dprime = tuple(k for k in range(len(factors)) if ra[k] <= sb[k])
    ok = all(2 * Fraction(sb[k]) >= Fraction(ra[k]) + Fraction(sb[k]) for k in dprime)
    if not ok:
        raise ConsistencyError("half-exhaustion bound failed")

    def sep(idx: tuple[int, ...], side: int) -> float:
        if len(idx) < 2:
            return math.inf
        arr = np.array([np.atleast_1d(np.asarray(factors[k][side], dtype=complex)).ravel() for k in idx])
        uniq = np.unique(arr, axis=0)
        return min_pairwise_distance(uniq)

    return TorusSplit(prime, dprime, ok, sep(prime, 0), sep(dprime, 1))


@dataclass(frozen=True)
class PropernessReport:
    radii: tuple[float, ...]
    counts: tuple[int, ...]

    @property
    def monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.counts, self.counts[1:]))


def verify_proper_on_part(
    points: DiscreteSet | Sequence[Any],
    projection: Callable[[np.ndarray], Any],
    radii: Sequence[float],
    rho_target: Callable[[Any], float] = rho_affine,
) -> PropernessReport:
    """Number of points whose projection lands in each target ball."""
    pts = [p.array() for p in points.points] if isinstance(points, DiscreteSet) else list(points)
    vals = np.sort(np.array([float(rho_target(projection(np.asarray(p)))) for p in pts]))
    counts = tuple(int(np.searchsorted(vals, r, side="right")) for r in radii)
    return PropernessReport(tuple(float(r) for r in radii), counts)


# -- the torus counterexample -------------------------------------------------


@dataclass(frozen=True)
class TorusMorphism:
    """``z -> z^M`` from (C*)^n to (C*)^(n-1) for an integer matrix M of full row rank."""

    exponent_matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        M = self.exponent_matrix
        if not M or any(len(row) != len(M[0]) for row in M):
            raise PreconditionError("exponent matrix must be rectangular")
        if len(M) != len(M[0]) - 1:
            raise PreconditionError("exponent matrix must have shape (n-1) x n")
        if rank(M) != len(M):
            raise PreconditionError("exponent matrix must have rank n-1")

    @property
    def n(self) -> int:
        return len(self.exponent_matrix[0])

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.exponent_matrix, dtype=float)

    def kernel(self) -> tuple[int, ...]:
        """Primitive integer vector spanning the kernel, first nonzero entry positive."""
        (v,) = nullspace(self.exponent_matrix)
        k = primitive_integer_vector(v)
        if next(x for x in k if x) < 0:
            k = [-x for x in k]
        return tuple(k)

    def __call__(self, z: Any) -> np.ndarray:
        logs = np.log(np.asarray(z, dtype=complex))
        return np.exp(logs @ self.matrix.T)

    def solve(self, s: Any) -> np.ndarray:
        """Log-coordinates ``w`` with ``exp(M w) = s`` (minimal-norm solution)."""
        return np.linalg.pinv(self.matrix) @ np.log(np.asarray(s, dtype=complex))

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.exponent_matrix]


def enumerate_torus_morphisms(n: int) -> Iterator[TorusMorphism]:
    """Surjective morphisms ordered by largest absolute exponent, then lexicographically."""
    if n < 2:
        raise PreconditionError("n must be at least 2")
    shape = (n - 1) * n
    m = 1
    while True:
        for flat in itertools.product(range(-m, m + 1), repeat=shape):
            if max(abs(x) for x in flat) != m:
                continue
            M = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n - 1))
            if rank(M) == n - 1:
                yield TorusMorphism(M)
        m += 1


def first_morphisms(n: int, J: int) -> list[TorusMorphism]:
    return list(itertools.islice(enumerate_torus_morphisms(n), J))


def factor_grid(q: int) -> list[complex]:
    """``2**(a/q) * exp(2 pi i b / q)`` for ``-q <= a <= q`` and ``0 <= b < q``."""
    if q < 1:
        raise PreconditionError("target density must be positive")
    return [2.0 ** (a / q) * complex(math.cos(2 * math.pi * b / q), math.sin(2 * math.pi * b / q))
            for a in range(-q, q + 1) for b in range(q)]


def sample_target(index: int, dim: int, q: int) -> np.ndarray:
    """The ``index``-th point of the product grid in (C*)^dim (mixed-radix order)."""
    grid = factor_grid(q)
    base = len(grid)
    if index >= base**dim:
        raise PreconditionError("sample index beyond the finite grid")
    out = []
    for _ in range(dim):
        index, r = divmod(index, base)
        out.append(grid[r])
    return np.array(out, dtype=complex)


def grid_distance(s: Any, dim: int, q: int) -> float:
    """Distance from a point of (C*)^dim to the nearest product-grid point."""
    grid = np.array(factor_grid(q))
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    return float(np.sqrt(sum(np.min(np.abs(grid - x)) ** 2 for x in s)))


def diagonal_pairing(J: int) -> Iterator[tuple[int, int]]:
    """Cantor-diagonal enumeration of ``{1..J} x {0, 1, ...}``."""
    t = 0
    while True:
        for j in range(1, min(J, t + 1) + 1):
            yield j, t - (j - 1)
        t += 1


def _rho_row(p: np.ndarray) -> float:
    # Same expression as core.rho_values for a torus set, so certificates agree bit for bit.
    arr = p.reshape(1, -1)
    return float(np.maximum.reduce([np.ones(1), np.linalg.norm(arr, axis=1), np.linalg.norm(1.0 / arr, axis=1)])[0])


def push_along_kernel(w: np.ndarray, kappa: Sequence[int], target: float) -> np.ndarray:
    """``exp(w + t kappa)`` for the least bisected ``t >= 0`` with rho at least ``target``."""
    kap = np.asarray(kappa, dtype=float)

    def point(t: float) -> np.ndarray:
        return np.exp(w + t * kap)

    if _rho_row(point(0.0)) >= target:
        return point(0.0)
    hi = 1.0
    while _rho_row(point(hi)) < target:
        hi *= 2
        if hi > 1e6:
            raise ConsistencyError("kernel push did not reach the target radius")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _rho_row(point(mid)) >= target:
            hi = mid
        else:
            lo = mid
    return point(hi)


@dataclass(frozen=True)
class CounterexampleResult:
    points: DiscreteSet
    morphisms: tuple[TorusMorphism, ...]
    pairing: tuple[tuple[int, int], ...]
    rhos: tuple[float, ...]
    thresholds_ok: bool
    threshold_counts: tuple[int, ...]
    proximity: tuple[float, ...]
    density: int

    @property
    def proximity_ok(self) -> bool:
        return all(d <= PROXIMITY_EPS for d in self.proximity)

    def to_json(self) -> dict:
        return {
            "morphisms": [F.to_json() for F in self.morphisms],
            "pairing": [list(p) for p in self.pairing],
            "rho": list(self.rhos),
            "certificates": {
                "threshold": {"holds": self.thresholds_ok, "counts": list(self.threshold_counts)},
                "proximity": {"eps": PROXIMITY_EPS, "max_distance": list(self.proximity), "holds": self.proximity_ok},
            },
        }


def attained_distance(points: Sequence[np.ndarray], F: TorusMorphism, s: Any) -> float:
    """min over the set of ``|F(g) - s|``."""
    if not len(points):
        return math.inf
    imgs = F(np.asarray(points))
    return float(np.min(np.linalg.norm(imgs - np.asarray(s, dtype=complex)[None, :], axis=1)))


def torus_counterexample(
    n: int,
    R: ThresholdSequence | Sequence[float],
    J: int,
    target_density: int,
    K: int,
    *,
    targets_checked: int = TARGETS_CHECKED,
) -> CounterexampleResult:
    """First ``K`` points ``g_k`` with ``F_j(g_k) = s`` for the paired ``(j, s)``
    and ``rho(g_k) >= max(k, R_k)``."""
    if n < 2:
        raise PreconditionError("n must be at least 2")
    if J < 1:
        raise PreconditionError("J must be at least 1")
    if K < 0:
        raise PreconditionError("K must be nonnegative")
    R = R if isinstance(R, ThresholdSequence) else ThresholdSequence(tuple(R))
    if len(R) < K:
        raise PreconditionError(f"need at least K={K} thresholds, got {len(R)}")
    Fs = first_morphisms(n, J)
    kernels = [F.kernel() for F in Fs]
    pairing = list(itertools.islice(diagonal_pairing(J), K))
    pts = []
    for k, (j, idx) in enumerate(pairing, start=1):
        F = Fs[j - 1]
        s = sample_target(idx, n - 1, target_density)
        pts.append(push_along_kernel(F.solve(s), kernels[j - 1], max(float(k), R[k - 1])))
    space = AmbientSpace.torus(n)
    D = DiscreteSet(space, tuple(Point.of(p) for p in pts), "torus-counterexample")
    rhos = rho_values(D) if K else np.zeros(0)
    for k, r in enumerate(rhos, start=1):
        if r < max(k, R[k - 1]):
            raise ConsistencyError(f"rho(g_{k}) = {r} below max(k, R_k)")
    check = check_threshold_condition(D, R.prefix(K))
    prox = []
    for j, F in enumerate(Fs, start=1):
        worst = 0.0
        for idx in range(targets_checked):
            s = sample_target(idx, n - 1, target_density)
            worst = max(worst, attained_distance(pts, F, s))
        prox.append(worst if K else math.inf)
    return CounterexampleResult(
        D, tuple(Fs), tuple(pairing), tuple(float(r) for r in rhos), check.holds, check.counts,
        tuple(prox) if K else (), target_density,
    )
