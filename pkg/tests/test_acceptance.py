"""End-to-end acceptance checks, each at its stated tolerance and time budget."""

from __future__ import annotations

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np

from conftest import record_criterion, unit_polydisc
from tamekit import automorphisms, rootsys
from tamekit.arithmetic import PolyMapOverK, QuadraticNumber, integrality_certificate, lcm_denominators
from tamekit.core import AmbientSpace, DiscreteSet, rho_values
from tamekit.gaussian import GaussianRational
from tamekit.generators import (
    attained_distance,
    coordinate_pair,
    partition_two_tame,
    sample_target,
    torus_counterexample,
)
from tamekit.nevanlinna import (
    ThresholdSequence,
    check_threshold_condition,
    counting_N,
    counting_N_integral,
    h_from_thresholds,
    sequence_for_h,
    threshold_sum,
    verify_r2h_contrapositive,
)
from tamekit.sl2 import (
    conjugate_unipotent,
    enumerate_ball,
    projection_discreteness,
    random_exact_sl2,
    standard_generators_zi,
)

SEED = 0x5EED


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def finish(number, title, ok, clock, limit, detail=""):
    within = limit is None or clock.elapsed < limit
    record_criterion(number, title, ok and within, clock.elapsed, limit, detail)
    assert ok, detail
    assert within, f"took {clock.elapsed:.2f} s, limit {limit} s"


# -- point-set generators ------------------------------------------------------


def random_sl(rng, n, m):
    mats = rng.normal(size=(m, n, n)) + 1j * rng.normal(size=(m, n, n))
    mats *= np.exp(rng.uniform(0, 3, size=(m, 1, 1)))
    det = np.linalg.det(mats)
    return mats / (det ** (1 / n))[:, None, None]


def random_mixed_set(rng, i):
    m = int(rng.integers(1, 501))
    kind = i % 3
    if kind == 0:
        n = int(rng.integers(1, 4))
        arr = (rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))) * np.exp(rng.uniform(-1, 6, size=(m, 1)))
        return DiscreteSet.from_arrays(AmbientSpace.affine(n), arr)
    if kind == 1:
        n = int(rng.integers(2, 4))
        return DiscreteSet.from_arrays(AmbientSpace.sl(n), random_sl(rng, n, m))
    n = int(rng.integers(1, 4))
    arr = np.exp(rng.normal(size=(m, n)) * 3 + 2j * np.pi * rng.uniform(size=(m, n)))
    return DiscreteSet.from_arrays(AmbientSpace.torus(n), arr)


def step_integral(rhos, r):
    """Exact integral of the step function n(t)/t over [1, r], interval by interval."""
    pts = sorted(x for x in rhos if x < r)
    total, count, prev = 0.0, 0, 1.0
    for x in pts:
        total += count * math.log(x / prev)
        count += 1
        prev = x
    return math.fsum([total, count * math.log(r / prev)])


def random_thresholds(rng, K):
    return ThresholdSequence(tuple(1.0 + np.cumsum(np.exp(rng.uniform(-3, 4, size=K)))))


# -- criteria ------------------------------------------------------------------


def test_criterion_01_counting_identity():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    ok = True
    with Clock() as c:
        for i in range(100):
            D = random_mixed_set(rng, i)
            rhos = rho_values(D)
            radii = np.geomspace(1.0, 4 * float(rhos.max()) + 2, 64)
            for r in radii:
                N = counting_N(D, float(r))
                for integral in (counting_N_integral(D, float(r)), step_integral(rhos, float(r))):
                    err = abs(N - integral)
                    worst = max(worst, err / (1 + N))
                    ok &= err <= 1e-6 * (1 + N)
    finish(1, "counting identity", ok, c, 10, f"max rel err {worst:.2e}")


def test_criterion_02_contrapositive():
    rng = np.random.default_rng(SEED + 2)
    worst = math.inf
    ok = True
    with Clock() as c:
        for _ in range(100):
            R = random_thresholds(rng, 20)
            k = int(rng.integers(1, 21))
            lo = max(1.0, R[k - 2]) if k > 1 else 1.0
            # k + 1 points squeezed into (R_{k-1}, R_k], with the edge case rho = R_k included
            rhos = list(rng.uniform(lo, R[k - 1], size=k)) + [R[k - 1]]
            rhos += list(R[k - 1] * np.exp(rng.uniform(0.1, 5, size=int(rng.integers(0, 30)))))
            phases = np.exp(2j * np.pi * rng.uniform(size=len(rhos)))
            phases[k] = 1.0  # keep |p| == R_k exact for the boundary point
            D = DiscreteSet.from_arrays(AmbientSpace.affine(1), (np.array(rhos) * phases)[:, None])
            check = check_threshold_condition(D, R)
            rep = verify_r2h_contrapositive(D, R, 20)
            ok &= check.first_violation == k and rep.status == "violation" and rep.k == k
            ok &= rep.margin >= -1e-9
            worst = min(worst, rep.margin)
    finish(2, "threshold contrapositive", ok, c, 10, f"min margin {worst:.3e}")


def test_criterion_03_growth_anchor():
    rng = np.random.default_rng(SEED + 3)
    ok = True
    worst = math.inf
    with Clock() as c:
        sequences = [random_thresholds(rng, 20) for _ in range(100)]
        sequences += [sequence_for_h(lambda r, a=a: np.log(r) ** a, 20, 1e12) for a in (1.5, 2.0, 3.0)]
        sequences += [ThresholdSequence(tuple(1 + j * 1e-9 for j in range(1, 21)))]
        for R in sequences:
            h = h_from_thresholds(R, len(R))
            for k in range(1, len(R) + 1):
                ratio = h.heights[k - 1] / h.log_breakpoints[k - 1]
                # exact comparison of rationals built from the stored floats
                ok &= Fraction(h.heights[k - 1]) * 2 > Fraction(h.log_breakpoints[k - 1]) * k
                worst = min(worst, ratio - k / 2)
    finish(3, "growth anchor", ok, c, None, f"min h/log p - k/2 = {worst:.3e}")


def test_criterion_04_threshold_sum_below_h():
    rng = np.random.default_rng(SEED + 4)
    ok = True
    tightest = math.inf
    r_max = 1e12
    grid = np.geomspace(1.0, r_max, 1025)[1:]
    with Clock() as c:
        for alpha in rng.uniform(1.5, 3.0, size=50):
            h = lambda r, a=alpha: np.log(r) ** a
            R = sequence_for_h(h, 20, r_max)
            gap = h(grid) - threshold_sum(R, grid)
            ok &= bool(np.all(gap > 0))
            tightest = min(tightest, float(gap.min()))
    finish(4, "threshold sum below h", ok, c, 5, f"min gap {tightest:.3e}")


def triple_product_oracle(g):
    """g U g^-1 multiplied out entry by entry, independently of the library."""
    a, b, cc, d = g.a, g.b, g.c, g.d
    one, zero = GaussianRational(1), GaussianRational(0)

    def mul(p, q):
        return (
            p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3],
            p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3],
        )

    inv = (d, -b, -cc, a)
    return mul(mul((a, b, cc, d), (one, one, zero, one)), inv)


def test_criterion_05_sl2_identity():
    rng = np.random.default_rng(SEED + 5)
    mismatches = 0
    with Clock() as c:
        for _ in range(1000):
            g = random_exact_sl2(rng)
            conj = conjugate_unipotent(g)
            if conj.closed_form != conj.product or conj.closed_form.entries != triple_product_oracle(g):
                mismatches += 1
            elif conj.closed_form.trace() != 2:
                mismatches += 1
    finish(5, "SL2 conjugation identity", mismatches == 0, c, 5, f"{mismatches} mismatches")


def test_criterion_06_projection_discreteness():
    with Clock() as c:
        ball = enumerate_ball(standard_generators_zi(), 8)
        report = projection_discreteness(ball, 1e9)
    ok = report.min_separation_sq >= 1 and report.count > 1000 and not any(ball.overflow or [])
    finish(6, "SL2(Z[i]) first-column separation", ok, c, 60,
           f"{len(ball)} elements, {report.count} columns, min sep^2 {report.min_separation_sq}")


def test_criterion_07_root_pair_spanning():
    ok = True
    ranks = []
    with Clock() as c:
        for rank, dim in ((2, 8), (3, 15)):
            RS = rootsys.build_root_system("A", rank)
            for a, b in itertools.permutations(range(rank), 2):
                rep = rootsys.verify_spanning(rootsys.build_pair(RS, a, b), RS)
                ranks.append(rep.dim_sum)
                ok &= rep.dim_sum == dim and rep.dim_g == dim
    finish(7, "root-pair spanning in A2, A3", ok, c, 5, f"ranks {ranks}")


def test_criterion_08_nilcone():
    ok = True
    with Clock() as c:
        for n in (2, 3, 4):
            fam = rootsys.nilcone_spanning_family(n)
            ok &= all(v.is_exact for v in fam)
            ok &= all(rootsys.ad_nilpotent(v) for v in fam)
            ok &= rootsys.family_rank(fam) == n * n - 1
    finish(8, "nil-cone spanning family", ok, c, 5)


def test_criterion_09_send_to_axis():
    rng = np.random.default_rng(SEED + 9)
    ok = True
    worst_res = worst_rt = 0.0
    with Clock() as c:
        for _ in range(50):
            m = int(rng.integers(1, 21))
            pts = unit_polydisc(rng, m, 2) * 3
            place = automorphisms.send_to_axis(pts)
            targets = np.array([[j, 0] for j in range(1, m + 1)], dtype=complex)
            direct = np.abs(place.chain.apply(pts) - targets).max()
            probes = unit_polydisc(rng, 100, 2) * 3
            rt = place.chain.roundtrip_error(probes)
            worst_res = max(worst_res, place.max_residual, float(direct))
            worst_rt = max(worst_rt, rt.error)
            ok &= place.max_residual <= 1e-8 and direct <= 1e-8 and rt.error <= 1e-10
    finish(9, "send to axis", ok, c, 10, f"max residual {worst_res:.2e}, max round-trip {worst_rt:.2e}")


def test_criterion_10_two_tame_partition():
    rng = np.random.default_rng(SEED + 10)
    ok = True
    with Clock() as c:
        for _ in range(100):
            arr = (rng.normal(size=(200, 3)) + 1j * rng.normal(size=(200, 3))) * np.exp(
                rng.uniform(0, 8, size=(200, 3))
            )
            D = DiscreteSet.from_arrays(AmbientSpace.affine(3), arr)
            part = partition_two_tame(D, coordinate_pair([0], [1, 2]))
            ok &= part.certificate and part.disjoint_union_ok(200)
            ok &= len(part.D1) + len(part.D2) == 200
            for k in part.indices1:
                ok &= Fraction(part.rho1[k]) + Fraction(part.rho2[k]) <= 2 * Fraction(part.rho1[k])
            for k in part.indices2:
                ok &= Fraction(part.rho1[k]) + Fraction(part.rho2[k]) < 2 * Fraction(part.rho2[k])
    finish(10, "two-tame partition", ok, c, 5)


def test_criterion_11_torus_counterexample():
    rng = np.random.default_rng(SEED + 11)
    ok = True
    worst = 0.0
    with Clock() as c:
        for n in (2, 3):
            R = random_thresholds(rng, 100)
            res = torus_counterexample(n, R, 3, 8, 100)
            check = check_threshold_condition(res.points, R)
            ok &= res.thresholds_ok and check.holds
            # exact count: every rho is compared against R_k as rationals
            rh = [Fraction(x) for x in res.rhos]
            ok &= all(sum(1 for x in rh if x <= Fraction(Rk)) <= k for k, Rk in enumerate(R.values, start=1))
            pts = [p.array() for p in res.points.points]
            for F in res.morphisms:
                for idx in range(10):
                    d = attained_distance(pts, F, sample_target(idx, len(F.exponent_matrix), 8))
                    worst = max(worst, d)
                    ok &= d <= 1e-3
    finish(11, "torus counterexample", ok, c, 30, f"max target distance {worst:.2e}")


def gaussian_eval(terms, x):
    """Evaluate sum c * prod x_i^e_i with GaussianRational arithmetic."""
    acc = GaussianRational(0)
    for mono, (re, im) in terms:
        t = GaussianRational(re, im)
        for xi, e in zip(x, mono):
            for _ in range(e):
                t = t * xi
        acc = acc + t
    return acc


def test_criterion_12_integrality():
    rnd = random.Random(SEED + 12)
    failures = oracle_failures = checked = 0
    with Clock() as c:
        for _ in range(20):
            n_vars, n_out = rnd.randint(1, 3), rnd.randint(1, 2)
            raw = []
            for _ in range(n_out):
                terms = []
                for _ in range(rnd.randint(1, 4)):
                    mono = tuple(rnd.randint(0, 3) for _ in range(n_vars))
                    den = rnd.randint(1, 12)
                    coeff = (Fraction(rnd.randint(-9, 9), den), Fraction(rnd.randint(-9, 9), den))
                    terms.append((mono, coeff))
                raw.append(terms)
            P = PolyMapOverK.from_terms(1, n_vars, [[(m, QuadraticNumber(1, *c)) for m, c in t] for t in raw])
            N = lcm_denominators(P)
            assert N <= math.lcm(*range(1, 13))
            inputs = [
                [QuadraticNumber.integer(1, rnd.randint(-20, 20), rnd.randint(-20, 20)) for _ in range(n_vars)]
                for _ in range(100)
            ]
            rep = integrality_certificate(P, inputs)
            failures += rep.failures
            checked += rep.checked
            for x in inputs:
                gx = [GaussianRational(v.x, v.y) for v in x]
                for terms in raw:
                    v = gaussian_eval(terms, gx)
                    if not (GaussianRational(N) * v).is_gaussian_integer():
                        oracle_failures += 1
    ok = failures == 0 and oracle_failures == 0 and checked == 2000
    finish(12, "integrality over Q(i)", ok, c, 5, f"{checked} inputs, {failures} failures")
