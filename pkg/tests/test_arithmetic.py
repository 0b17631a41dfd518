from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamekit.arithmetic import (
    SUPPORTED_D,
    PolyMapOverK,
    QuadraticNumber,
    embed,
    first_column_map,
    integrality_certificate,
    lcm_denominators,
    matrix_group_ball_integrality,
    min_nonzero_norm,
)
from tamekit.errors import PreconditionError
from tamekit.sl2 import enumerate_ball, standard_generators_zi


def test_embed_examples():
    assert embed(QuadraticNumber.integer(1, 1, 0)) == 1
    assert embed(QuadraticNumber.integer(1, 0, 1)) == 1j
    w = QuadraticNumber.integer(3, 0, 1)
    assert embed(w) == pytest.approx(complex(0.5, math.sqrt(3) / 2))
    assert w.norm() == 1
    assert abs(embed(w)) == pytest.approx(1)


@pytest.mark.parametrize("d", SUPPORTED_D)
def test_min_nonzero_norm(d):
    assert min_nonzero_norm(d).min_abs == 1.0


def test_unsupported_ring():
    with pytest.raises(PreconditionError):
        QuadraticNumber.integer(5, 1, 0)


coords = st.fractions(min_value=-20, max_value=20, max_denominator=7)


@pytest.mark.parametrize("d", SUPPORTED_D)
@given(coords, coords, coords, coords)
def test_embed_is_ring_homomorphism(d, a, b, c, e):
    x, y = QuadraticNumber(d, a, b), QuadraticNumber(d, c, e)
    assert embed(x * y) == pytest.approx(embed(x) * embed(y), abs=1e-9)
    assert embed(x + y) == pytest.approx(embed(x) + embed(y), abs=1e-12)
    assert (x * y).norm() == x.norm() * y.norm()
    assert float(x.norm()) == pytest.approx(abs(embed(x)) ** 2, rel=1e-9, abs=1e-12)
    if y:
        assert (x / y) * y == x


@pytest.mark.parametrize("d", SUPPORTED_D)
def test_lattice_separation(d):
    pts = [QuadraticNumber.integer(d, x, y) for x, y in itertools.product(range(-3, 4), repeat=2)]
    bound = min_nonzero_norm(d).min_abs
    for p, q in itertools.combinations(pts, 2):
        assert abs(embed(p) - embed(q)) >= bound - 1e-12


def test_lcm_examples():
    z2 = PolyMapOverK.from_terms(1, 1, [[((2,), 1)]])
    assert lcm_denominators(z2) == 1
    P = PolyMapOverK.from_terms(1, 1, [[((1,), Fraction(1, 2)), ((2,), Fraction(1, 3))]])
    assert lcm_denominators(P) == 6
    (v,) = P([QuadraticNumber.integer(1, 1)])
    assert 6 * v == QuadraticNumber.integer(1, 5)
    Q = PolyMapOverK.from_terms(1, 2, [[((1, 0), Fraction(1, 2))], [((0, 1), Fraction(1, 2))]])
    assert lcm_denominators(Q) == 2


def test_lcm_is_minimal():
    P = PolyMapOverK.from_terms(1, 1, [[((1,), (1, 1, 4))], [((0,), (0, 3, 6))]])
    N = lcm_denominators(P)
    assert N == 4
    coeffs = [c for comp in P.components for c in comp.values()]
    for M in range(1, N):
        assert not all((M * c).is_integral() for c in coeffs)


def test_half_integer_basis_integrality():
    # (1 + sqrt(-3))/2 is an algebraic integer in the d=3 ring.
    w = QuadraticNumber.integer(3, 0, 1)
    assert w.is_integral() and (w * w).is_integral()
    half = QuadraticNumber(3, Fraction(1, 2), 0)
    assert not half.is_integral()


def test_certificate_detects_nothing_wrong(rng):
    P = PolyMapOverK.from_terms(1, 2, [[((1, 1), (1, 2, 3)), ((0, 2), (5, 0, 4))]])
    inputs = [
        [QuadraticNumber.integer(1, int(a), int(b)) for a, b in rng.integers(-9, 10, size=(2, 2))]
        for _ in range(50)
    ]
    rep = integrality_certificate(P, inputs)
    assert rep.ok and rep.N == 12 and rep.checked == 50


def test_ball_integrality_examples():
    ball = enumerate_ball(standard_generators_zi(), 6)
    rep = matrix_group_ball_integrality(ball, first_column_map())
    assert rep.N == 1 and rep.ok and rep.min_separation >= 1
    rep = matrix_group_ball_integrality(ball, first_column_map(scale=Fraction(1, 2)))
    assert rep.N == 2 and rep.ok


def test_ball_integrality_empty():
    class Empty:
        elements = ()

    rep = matrix_group_ball_integrality(Empty(), first_column_map())
    assert rep.ok and rep.checked == 0


def test_json_roundtrip():
    P = PolyMapOverK.from_terms(2, 2, [[((1, 1), (1, 2, 3))], [((0, 2), (5, 0, 4))]])
    assert PolyMapOverK.from_json(P.to_json()) == P
