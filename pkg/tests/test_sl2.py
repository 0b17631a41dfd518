from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamekit.errors import PreconditionError
from tamekit.gaussian import GaussianRational
from tamekit.sl2 import (
    U,
    SL2Element,
    conjugate_unipotent,
    enumerate_ball,
    first_column,
    identity,
    is_unipotent,
    nontrivial_unipotent,
    projection_discreteness,
    random_exact_sl2,
    standard_generators_z,
    standard_generators_zi,
)


def brute_force_ball(gens, L):
    """Oracle: multiply out every word of length at most L, no pruning."""
    gens = list(gens) + [g.inverse() for g in gens]
    out = set()
    for length in range(L + 1):
        for word in itertools.product(gens, repeat=length):
            g = identity(True)
            for h in word:
                g = g @ h
            out.add(g)
    return out


def triple_product(g):
    G = np.array([[g.a, g.b], [g.c, g.d]], dtype=object)
    Ginv = np.array([[g.d, -g.b], [-g.c, g.a]], dtype=object)
    u = np.array([[GaussianRational(1), GaussianRational(1)], [GaussianRational(0), GaussianRational(1)]], dtype=object)
    return G.dot(u).dot(Ginv)


def test_conjugate_examples():
    assert conjugate_unipotent(identity()).closed_form == U
    res = conjugate_unipotent(SL2Element.exact(2, 1, 1, 1))
    assert res.closed_form == SL2Element.exact(-1, 4, -1, 3)


def test_conjugate_closed_form_against_independent_product(rng):
    for _ in range(200):
        g = random_exact_sl2(rng)
        res = conjugate_unipotent(g)
        P = triple_product(g)
        assert res.closed_form.rows() == P.tolist()
        assert res.closed_form.trace() == 2


def test_conjugate_float_mode(rng):
    g = SL2Element.of(*(complex(x) for x in random_exact_sl2(rng, bound=3, den=2).entries))
    res = conjugate_unipotent(g)
    assert res.closed_form.close_to(res.product, 1e-9)


def test_det_check():
    with pytest.raises(PreconditionError):
        SL2Element.exact(1, 1, 1, 1)
    with pytest.raises(PreconditionError):
        SL2Element.of(2, 0, 0, 1)


def test_first_column_examples():
    assert first_column(identity()) == (1, 0)
    assert first_column(SL2Element.exact(2, 1, 1, 1)) == (2, 1)
    assert first_column(U) == (1, 0)


def test_ball_examples():
    assert len(enumerate_ball(standard_generators_z(), 0)) == 1
    ball = enumerate_ball([U], 3)
    assert len(ball) == 7
    assert set(ball.elements) == {SL2Element.exact(1, k, 0, 1) for k in range(-3, 4)}


@pytest.mark.parametrize("L", [0, 1, 2, 3, 4])
def test_ball_matches_brute_force_sl2z(L):
    ball = enumerate_ball(standard_generators_z(), L)
    assert set(ball.elements) == brute_force_ball(standard_generators_z(), L)
    assert len(set(ball.elements)) == len(ball)


def test_ball_matches_brute_force_zi():
    ball = enumerate_ball(standard_generators_zi(), 3)
    assert set(ball.elements) == brute_force_ball(standard_generators_zi(), 3)


def test_ball_words_shortlex_and_valid():
    ball = enumerate_ball(standard_generators_z(), 4)
    keys = [(len(w), w) for w in ball.words]
    assert keys == sorted(keys)
    for g, w in zip(ball.elements, ball.words):
        h = identity()
        for k in w:
            h = h @ ball.generators[k]
        assert h == g


def test_ball_monotone():
    small = set(enumerate_ball(standard_generators_zi(), 3).elements)
    big = set(enumerate_ball(standard_generators_zi(), 4).elements)
    assert small <= big


def test_ball_rational_generators():
    half = GaussianRational(Fraction(1, 2))
    gens = [SL2Element(GaussianRational(2), GaussianRational(0), GaussianRational(0), half)]
    ball = enumerate_ball(gens, 2)
    assert len(ball) == 5


def test_float_ball_agrees_with_exact():
    exact = enumerate_ball(standard_generators_z(), 4)
    flt = enumerate_ball([SL2Element.of(*g.entries) for g in standard_generators_z()], 4)
    assert len(flt) == len(exact)
    assert not any(flt.overflow)


def test_float_ball_flags_overflow():
    big = SL2Element.of(1e80, 0, 0, 1e-80)
    ball = enumerate_ball([big], 3)
    assert any(ball.overflow)


def test_psl_halves_sl2z_ball():
    sl = enumerate_ball(standard_generators_z(), 4)
    psl = enumerate_ball(standard_generators_z(), 4, psl=True)
    classes = {frozenset({g, SL2Element(-g.a, -g.b, -g.c, -g.d)}) for g in sl.elements}
    assert len(psl) <= len(classes) < len(sl)


def test_projection_examples():
    rep = projection_discreteness(enumerate_ball(standard_generators_zi(), 6), 10)
    assert rep.min_separation >= 1
    assert rep.min_separation_sq == 1
    rep = projection_discreteness(enumerate_ball([U], 3), 10)
    assert rep.count == 1 and rep.min_separation == math.inf
    rep = projection_discreteness(enumerate_ball([U], 3), 0.5)
    assert rep.count == 0 and rep.min_separation == math.inf


def test_projection_exact_min_matches_brute_force():
    ball = enumerate_ball(standard_generators_zi(), 4)
    rep = projection_discreteness(ball, 6)
    cols = list(rep.columns)
    brute = min(
        (p[0] - q[0]).abs2() + (p[1] - q[1]).abs2() for p, q in itertools.combinations(cols, 2)
    )
    assert rep.min_separation_sq == brute


def test_unipotent_examples():
    assert is_unipotent(U)
    assert not is_unipotent(SL2Element.of(2, 0, 0, 0.5))
    assert is_unipotent(SL2Element.exact(1, 0, 5, 1))
    assert is_unipotent(identity()) and not nontrivial_unipotent(identity())
    assert nontrivial_unipotent(U)


@given(st.integers(-6, 6), st.integers(-6, 6))
def test_conjugates_of_u_are_unipotent(a, c):
    if a == 0 and c == 0:
        return
    # Complete (a, c) to a det-1 matrix over Q(i) when possible.
    if a != 0:
        g = SL2Element.exact(a, 0, c, Fraction(1, a))
    else:
        g = SL2Element.exact(0, Fraction(-1, c), c, 0)
    assert nontrivial_unipotent(conjugate_unipotent(g).closed_form)
