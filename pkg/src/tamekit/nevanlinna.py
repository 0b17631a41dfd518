"""Counting functions of discrete sets and threshold-sequence constructions.

For a finite set ``D`` with exhaustion values ``rho >= 1``::

    n(t, D) = #{x in D : rho(x) <= t}
    N(r, D) = integral_1^r n(t, D) dt / t = sum_p log+(r / rho(p))

The second equality is computed both ways (:func:`counting_N` and
:func:`counting_N_integral`) so each route checks the other.

Breakpoints of the growth function built by :func:`h_from_thresholds` grow
doubly exponentially, so that class stores them as logarithms.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .core import DiscreteSet, rho_values
from .errors import ConsistencyError, PreconditionError

CROSS_CHECK_RTOL = 1e-6
RADIUS_MARGIN = 1e-6
SAMPLES_PER_DECADE = 64

GrowthFunction = Callable[[Any], Any]


def _sorted_rhos(D: DiscreteSet | Iterable[float]) -> np.ndarray:
    if isinstance(D, DiscreteSet):
        vals = rho_values(D)
    else:
        vals = np.asarray(list(D) if not isinstance(D, np.ndarray) else D, dtype=float)
        if vals.size and vals.min() < 1:
            raise PreconditionError("exhaustion values must be >= 1")
    return np.sort(vals.ravel())


def counting_n(D: DiscreteSet | Iterable[float], t: float) -> int:
    """Number of points with exhaustion value <= t."""
    rhos = _sorted_rhos(D)
    return int(np.searchsorted(rhos, t, side="right"))


def counting_N(D: DiscreteSet | Iterable[float], r: float, cross_check: bool = False) -> float:
    """``sum_p log+(r / rho(p))``; optionally cross-checked against quadrature."""
    if r < 1:
        raise PreconditionError("r must be >= 1")
    rhos = _sorted_rhos(D)
    value = _log_plus_sum(np.log(rhos), math.log(r))
    if cross_check:
        integral = counting_N_integral(rhos, r)
        if abs(value - integral) > CROSS_CHECK_RTOL * (1 + abs(value)):
            raise ConsistencyError(
                f"N(r) sum {value!r} disagrees with quadrature {integral!r} at r={r!r}"
            )
    return value


def _log_plus_sum(log_rhos: np.ndarray, log_r: float) -> float:
    terms = log_r - log_rhos
    return math.fsum(terms[terms > 0])


def counting_N_integral(D: DiscreteSet | Iterable[float], r: float, order: int = 4) -> float:
    """``integral_1^r n(t) dt/t`` by composite Gauss-Legendre in ``u = log t``.

    The panels are split at every ``log rho`` so the integrand is constant on
    each panel interior; ``n`` is evaluated only through :func:`counting_n`
    style counting, never through ``log+``.
    """
    if r < 1:
        raise PreconditionError("r must be >= 1")
    rhos = _sorted_rhos(D)
    upper = math.log(r)
    if upper == 0:
        return 0.0
    cuts = np.log(rhos)
    cuts = cuts[(cuts > 0) & (cuts < upper)]
    edges = np.unique(np.concatenate([[0.0], cuts, [upper]]))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo) / 2
    u = (lo + hi)[:, None] / 2 + half[:, None] * nodes[None, :]
    n_vals = np.searchsorted(rhos, np.exp(u), side="right")
    panel = half * (n_vals * weights[None, :]).sum(axis=1)
    return math.fsum(panel)


@dataclass(frozen=True)
class CountingProfile:
    samples: tuple[tuple[float, int, float], ...]

    def __post_init__(self) -> None:
        ts = [s[0] for s in self.samples]
        if ts != sorted(ts):
            raise PreconditionError("profile radii must be increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "n", "N"])
        for t, n, N in self.samples:
            w.writerow([repr(float(t)), n, repr(float(N))])
        return buf.getvalue()


def log_grid(r_max: float, per_decade: int = SAMPLES_PER_DECADE, r_min: float = 1.0) -> np.ndarray:
    """Geometric grid from ``r_min`` to ``r_max`` inclusive, ``per_decade`` points per decade."""
    if r_max < r_min:
        raise PreconditionError("r_max must be >= r_min")
    decades = math.log10(r_max / r_min)
    count = max(2, int(math.ceil(decades * per_decade)) + 1)
    grid = np.geomspace(r_min, r_max, count)
    grid[0], grid[-1] = r_min, r_max
    return grid


def counting_profile(D: DiscreteSet | Iterable[float], radii: Sequence[float]) -> CountingProfile:
    rhos = _sorted_rhos(D)
    logs = np.log(rhos)
    samples = tuple(
        (float(r), int(np.searchsorted(rhos, r, side="right")), _log_plus_sum(logs, math.log(r)))
        for r in radii
    )
    return CountingProfile(samples)


# -- threshold sequences ----------------------------------------------------

@dataclass(frozen=True)
class ThresholdSequence:
    """Strictly increasing radii ``R_1 < R_2 < ...``, all >= 1 (index k starts at 1)."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if vals and vals[0] < 1:
            raise PreconditionError("threshold values must be >= 1")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise PreconditionError("threshold sequence must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def prefix(self, K: int) -> ThresholdSequence:
        return ThresholdSequence(self.values[:K])


def _evaluate(h: GrowthFunction, grid: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(h(grid), dtype=float)
        if vals.shape == grid.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(h(float(r))) for r in grid])


def _check_samples(grid: np.ndarray, vals: np.ndarray, check_growth: bool) -> None:
    if not np.all(np.isfinite(vals)):
        raise PreconditionError("h is not finite on the sample grid")
    drops = np.diff(vals)
    if np.any(drops < -1e-12 * (1 + np.abs(vals[1:]))):
        raise PreconditionError("h is not increasing on the sample grid")
    if not check_growth:
        return
    logs = np.log(grid)
    tail = logs >= 1
    if tail.sum() < 4:
        raise PreconditionError("sample grid too short to check h(r)/log r -> infinity")
    ratio = vals[tail] / logs[tail]
    mid = len(ratio) // 2
    # The ratio must keep growing over the upper half of the log range.
    if not (ratio[-1] > ratio[mid] and ratio[-1] > ratio[mid:].min() * (1 + 1e-9)):
        raise PreconditionError("h(r)/log r does not appear to tend to infinity")


def _sup_log_minus_h(h: GrowthFunction, grid: np.ndarray, vals: np.ndarray, scale: float) -> float:
    """sup over [1, r_max] of log r - scale*h(r), refined around the best sample."""
    logs = np.log(grid)
    excess = logs - scale * vals
    i = int(np.argmax(excess))
    best = float(excess[i])
    lo, hi = logs[max(i - 1, 0)], logs[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda u: -(u - scale * float(np.asarray(h(math.exp(u))))),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-10},
        )
        if res.success:
            best = max(best, float(-res.fun))
    return best


def radius_for_h(
    h: GrowthFunction,
    r_max: float,
    *,
    margin: float = RADIUS_MARGIN,
    per_decade: int = SAMPLES_PER_DECADE,
    check_growth: bool = True,
) -> float:
    """A radius ``R > 1`` with ``log+(r/R) < h(r)`` on every sampled ``r`` in ``[1, r_max]``.

    ``R = max(exp(B), 1) * (1 + margin)`` where ``B`` bounds ``log r - h(r)``.
    """
    grid = log_grid(r_max, per_decade)
    vals = _evaluate(h, grid)
    _check_samples(grid, vals, check_growth)
    B = _sup_log_minus_h(h, grid, vals, 1.0)
    return max(math.exp(B), 1.0) * (1 + margin)


def sequence_for_h(
    h: GrowthFunction,
    K: int,
    r_max: float,
    *,
    margin: float = RADIUS_MARGIN,
    per_decade: int = SAMPLES_PER_DECADE,
    check_growth: bool = True,
) -> ThresholdSequence:
    """``R_k`` from the radius construction applied to ``2^-k h``, made strictly increasing."""
    if K < 0:
        raise PreconditionError("K must be >= 0")
    if K == 0:
        return ThresholdSequence(())
    grid = log_grid(r_max, per_decade)
    vals = _evaluate(h, grid)
    _check_samples(grid, vals, check_growth)
    out: list[float] = []
    for k in range(1, K + 1):
        B = _sup_log_minus_h(h, grid, vals, 2.0 ** -k)
        R = max(math.exp(B), 1.0) * (1 + margin)
        if out and R <= out[-1]:
            R = out[-1] * (1 + margin)
        out.append(R)
    return ThresholdSequence(tuple(out))


def threshold_sum(R: ThresholdSequence, r: Any) -> Any:
    """``sum_k log+(r / R_k)``, vectorised over ``r``."""
    r = np.asarray(r, dtype=float)
    logs = np.log(np.asarray(R.values))
    lr = np.log(r)[..., None]
    return np.clip(lr - logs, 0, None).sum(axis=-1)


# -- the growth function attached to a threshold sequence --------------------

@dataclass(frozen=True)
class PiecewiseLogFunction:
    """``h(t) = a_k + b_k log t`` between consecutive breakpoints ``p_k = e^{c_k} R_k``.

    Anchors: ``h(p_k) = c_k (k+1)``. Below ``p_1``: ``h(p_1) * max(0, log t / log p_1)``.
    Above ``p_K`` the last segment is extended (or, for K = 1, the proportional rule).
    """

    thresholds: tuple[float, ...]
    anchors: tuple[float, ...]
    log_breakpoints: tuple[float, ...]
    heights: tuple[float, ...]

    @property
    def K(self) -> int:
        return len(self.anchors)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """``p_k``; overflows to ``inf`` once ``log p_k`` exceeds ~709."""
        return tuple(math.exp(u) if u < 709 else math.inf for u in self.log_breakpoints)

    @property
    def segments(self) -> tuple[tuple[float, float], ...]:
        segs = []
        lp, hs = self.log_breakpoints, self.heights
        for k in range(self.K - 1):
            b = (hs[k + 1] - hs[k]) / (lp[k + 1] - lp[k])
            segs.append((hs[k] - b * lp[k], b))
        return tuple(segs)

    def value_at_log(self, u: float) -> float:
        lp, hs = self.log_breakpoints, self.heights
        k = int(np.searchsorted(lp, u, side="left"))
        if k < self.K and lp[k] == u:
            return hs[k]
        if u < lp[0] or self.K == 1:
            return hs[0] * max(0.0, u / lp[0])
        a, b = self.segments[min(k - 1, self.K - 2)]
        return a + b * u

    def __call__(self, t: Any) -> Any:
        t_arr = np.asarray(t, dtype=float)
        out = np.array([self.value_at_log(math.log(x)) for x in t_arr.ravel()])
        return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    def invariant_violations(self, tol: float = 1e-9) -> list[str]:
        problems = []
        lp, hs = self.log_breakpoints, self.heights
        if any(b <= a for a, b in zip(lp, lp[1:])):
            problems.append("breakpoints not strictly increasing")
        if lp and lp[0] < 0:
            problems.append("p_1 < 1")
        for k, (a, b) in enumerate(self.segments):
            if not b > 0:
                problems.append(f"segment {k + 1} slope {b} <= 0")
            for j in (k, k + 1):
                if abs(a + b * lp[j] - hs[j]) > tol * (1 + abs(hs[j])):
                    problems.append(f"segment {k + 1} discontinuous at p_{j + 1}")
        for k, c in enumerate(self.anchors, start=1):
            if hs[k - 1] != c * (k + 1):
                problems.append(f"anchor h(p_{k}) != c_{k}({k}+1)")
            if not hs[k - 1] / lp[k - 1] > k / 2:
                problems.append(f"growth h(p_{k})/log p_{k} <= {k}/2")
        return problems

    def table(self) -> list[dict[str, float]]:
        rows = []
        for k in range(self.K):
            rows.append({
                "k": k + 1,
                "R_k": self.thresholds[k],
                "c_k": self.anchors[k],
                "p_k": self.breakpoints[k],
                "h(p_k)": self.heights[k],
                "log_p_k": self.log_breakpoints[k],
            })
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["k", "R_k", "c_k", "p_k", "h(p_k)", "log_p_k"]
        w.writerow(cols)
        for row in self.table():
            w.writerow([row["k"]] + [repr(float(row[c])) for c in cols[1:]])
        return buf.getvalue()


def _anchor_ok(c: float, k: int, c_prev: float, logR_prev: float, logR: float) -> bool:
    if not c > 1:
        return False
    # c_prev < c e^{c_prev} R_prev < e^{c} R_k, compared in logs
    mid = math.log(c) + c_prev + logR_prev
    if not (math.log(c_prev) < mid < c + logR):
        return False
    return c * (k + 1) / (c + logR) > k / 2


def h_from_thresholds(R: ThresholdSequence | Sequence[float], K: int) -> PiecewiseLogFunction:
    """Growth function whose bound ``N(r, D) <= h(r)`` forces the threshold condition.

    ``c_1`` is the first of 2, 4, 8, ... with ``2c/(c + log R_1) > 1/2``; each
    later ``c_k`` is the first rung of ``c_{k-1}+1, 2(c_{k-1}+1), 4(c_{k-1}+1), ...``
    meeting all three anchor conditions. Every rung is an integer, so the
    anchors ``c_k (k+1)`` are exact in floating point while ``c_k < 2**53``.
    """
    if not isinstance(R, ThresholdSequence):
        R = ThresholdSequence(tuple(R))
    if K < 1:
        raise PreconditionError("K must be >= 1")
    if len(R) < K:
        raise PreconditionError(f"need at least K={K} thresholds, got {len(R)}")
    logR = [math.log(v) for v in R.values[:K]]
    c = 2.0
    while not 2 * c / (c + logR[0]) > 0.5:
        c *= 2
    anchors = [c]
    for k in range(2, K + 1):
        cand = anchors[-1] + 1
        while not _anchor_ok(cand, k, anchors[-1], logR[k - 2], logR[k - 1]):
            cand *= 2
            if cand > 2.0 ** 52:
                raise PreconditionError("anchor ladder exceeded exact float range")
        anchors.append(cand)
    lps = tuple(ck + lr for ck, lr in zip(anchors, logR))
    heights = tuple(ck * (k + 1) for k, ck in enumerate(anchors, start=1))
    return PiecewiseLogFunction(tuple(R.values[:K]), tuple(anchors), lps, heights)


@dataclass(frozen=True)
class ThresholdCheck:
    holds: bool
    first_violation: int | None
    counts: tuple[int, ...]


def check_threshold_condition(
    D: DiscreteSet | Iterable[float], R: ThresholdSequence | Sequence[float]
) -> ThresholdCheck:
    """Check ``#{x : rho(x) <= R_k} <= k`` for every k in the sequence."""
    values = R.values if isinstance(R, ThresholdSequence) else tuple(R)
    rhos = _sorted_rhos(D)
    counts = tuple(int(c) for c in np.searchsorted(rhos, np.asarray(values, dtype=float), side="right"))
    for k, cnt in enumerate(counts, start=1):
        if cnt > k:
            return ThresholdCheck(False, k, counts)
    return ThresholdCheck(True, None, counts)


@dataclass(frozen=True)
class ContrapositiveReport:
    status: str  # "violation" or "vacuous"
    k: int | None
    N_at_p_k: float | None
    h_at_p_k: float | None
    margin: float | None
    log_p_k: float | None


def verify_r2h_contrapositive(
    D: DiscreteSet | Iterable[float], R: ThresholdSequence | Sequence[float], K: int
) -> ContrapositiveReport:
    """If the threshold condition fails at some ``k <= K``, measure ``N(p_k) - h(p_k)``.

    With ``log p_k = c_k + log R_k`` each term of ``N(p_k)`` is summed as the
    pair ``(c_k, log R_k - log rho)`` so nothing is lost to the size of ``c_k``.
    """
    if not isinstance(R, ThresholdSequence):
        R = ThresholdSequence(tuple(R))
    h = h_from_thresholds(R, K)
    rhos = _sorted_rhos(D)
    check = check_threshold_condition(rhos, R.prefix(K))
    if check.holds:
        return ContrapositiveReport("vacuous", None, None, None, None, None)
    k = check.first_violation
    ck = h.anchors[k - 1]
    deltas = math.log(R[k - 1]) - np.log(rhos)
    parts: list[float] = []
    for d in deltas:
        if ck + d > 0:
            parts.extend((ck, float(d)))
    N = math.fsum(parts)
    hk = h.heights[k - 1]
    margin = math.fsum(parts + [-hk])
    return ContrapositiveReport("violation", k, N, hk, margin, h.log_breakpoints[k - 1])


def threshold_transform_2r1(R: ThresholdSequence | Sequence[float]) -> ThresholdSequence:
    values = R.values if isinstance(R, ThresholdSequence) else tuple(R)
    return ThresholdSequence(tuple(2 * v + 1 for v in values))
