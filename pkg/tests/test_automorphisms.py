from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import unit_polydisc
from tamekit.automorphisms import (
    AutomorphismChain,
    OvershearMap,
    PolyMapInterpolant,
    ShearMap,
    apply_overshear,
    apply_shear,
    build_interpolant,
    fiber_restriction,
    invert_overshear,
    jacobian_fd,
    map_from_json,
    prescribe_fiber_automorphisms,
    send_to_axis,
)
from tamekit.core import AmbientSpace, DiscreteSet, Point
from tamekit.errors import PreconditionError


def lagrange_oracle(xs, ys, s):
    """Textbook Lagrange basis evaluation."""
    total = 0
    for k, (xk, yk) in enumerate(zip(xs, ys)):
        term = yk
        for i, xi in enumerate(xs):
            if i != k:
                term *= (s - xi) / (xk - xi)
        total += term
    return total


def test_interpolant_examples():
    f = build_interpolant([[0], [1]], [0, 1])
    assert f([[0.3 + 2j]])[0, 0] == pytest.approx(0.3 + 2j)
    g = build_interpolant([[1], [2], [3]], [1, 4, 9])
    assert np.allclose(g.coefficients[:, 0], [0, 0, 1], atol=1e-12)
    for s in (-2.5, 0.1j, 7):
        assert g([[s]])[0, 0] == pytest.approx(s * s)
    c = build_interpolant([[5]], [7])
    assert c([[123.0]])[0, 0] == 7


def test_interpolant_exact_at_nodes(rng):
    base = unit_polydisc(rng, 15, 3)
    vals = rng.normal(size=(15, 2)) + 1j * rng.normal(size=(15, 2))
    f = build_interpolant(base, vals)
    assert np.array_equal(f(base), vals)


def test_interpolant_matches_lagrange_oracle(rng):
    xs = rng.normal(size=6) + 1j * rng.normal(size=6)
    ys = rng.normal(size=6) + 1j * rng.normal(size=6)
    f = build_interpolant(xs.reshape(-1, 1), ys)
    for s in rng.normal(size=5) + 1j * rng.normal(size=5):
        assert f([[s]])[0, 0] == pytest.approx(lagrange_oracle(xs, ys, s), rel=1e-9)


def test_interpolant_uses_random_functional_on_collision():
    base = [[0, 0], [0, 1], [1, 0]]
    f = build_interpolant(base, [1, 2, 3])
    assert not np.allclose(f.functional, [1, 0])
    assert np.allclose(f(base)[:, 0], [1, 2, 3])


def test_interpolant_collision_error():
    with pytest.raises(PreconditionError, match="no separating functional"):
        build_interpolant([[1, 1], [1, 1]], [0, 1])


def test_mp_evaluation_agrees_with_float(rng):
    import gmpy2

    base = unit_polydisc(rng, 8, 2)
    f = build_interpolant(base, rng.normal(size=8))
    x = unit_polydisc(rng, 1, 2)[0]
    with gmpy2.context(gmpy2.get_context(), precision=200):
        v = f.evaluate_mp([gmpy2.mpc(complex(z)) for z in x])[0]
    assert complex(v) == pytest.approx(f([x])[0, 0], rel=1e-9)


def test_shear_examples():
    ident = ShearMap(PolyMapInterpolant.constant(0, 1), axis=1, base=(0,), dim=2)
    assert np.array_equal(apply_shear(ident, np.array([3 + 1j, 2.0])), np.array([3 + 1j, 2.0]))
    phi = ShearMap(build_interpolant([[0], [1]], [0, 1]), axis=1, base=(0,), dim=2)
    assert np.allclose(apply_shear(phi, np.array([1.0, 0.0])), [1, 1])
    p = apply_shear(phi, Point.of([2, 5]))
    assert isinstance(p, Point) and np.allclose(p.array(), [2, 7])


def test_shear_preserves_fibres_and_inverts(rng):
    base = unit_polydisc(rng, 6, 2)
    phi = ShearMap(build_interpolant(base, rng.normal(size=6)), axis=2, base=(0, 1), dim=3)
    x = unit_polydisc(rng, 100, 3)
    y = phi.apply(x)
    assert np.max(np.abs(y[:, :2] - x[:, :2])) <= 1e-12
    assert np.max(np.abs(phi.invert(y) - x)) <= 1e-10


def test_sl2_shear_right_multiplies():
    cols = np.array([[1, 0], [1, 1], [2, 1]], dtype=complex)
    f = build_interpolant(cols, [0.5, -1, 2j])
    phi = ShearMap(f, kind="sl2")
    g = np.array([[2, 1], [1, 1]], dtype=complex)
    out = phi.apply(g)[0]
    assert np.allclose(out, g @ np.array([[1, 2j], [0, 1]]))
    assert np.allclose(out[:, 0], g[:, 0])
    assert np.allclose(phi.invert(out)[0], g)


def test_overshear_examples():
    zero = PolyMapInterpolant.constant(0, 1)
    ident = OvershearMap(zero, zero, axis=1, dim=2)
    assert np.allclose(apply_overshear(ident, np.array([1.0, 2.0])), [1, 2])
    psi = OvershearMap(zero, build_interpolant([[0], [1]], [0, 1]), axis=1, dim=2)
    assert np.allclose(apply_overshear(psi, np.array([1.0, 2.0])), [1, 3])
    assert np.allclose(invert_overshear(psi, np.array([1.0, 3.0])), [1, 2])


def test_overshear_roundtrip_1000(rng):
    base = unit_polydisc(rng, 5, 2)
    psi = OvershearMap(
        build_interpolant(base, rng.normal(size=5) + 1j * rng.normal(size=5)),
        build_interpolant(base, rng.normal(size=5)),
        axis=2,
        dim=3,
    )
    x = unit_polydisc(rng, 1000, 3)
    chain = AutomorphismChain((psi,), 3)
    assert chain.roundtrip_error(x).error <= 1e-10


def test_volume_preserving_shear_and_overshear_jacobian(rng):
    base = unit_polydisc(rng, 4, 1)
    phi = ShearMap(build_interpolant(base, rng.normal(size=4)), axis=1, base=(0,), dim=2)
    x = unit_polydisc(rng, 1, 2)[0]
    J = jacobian_fd(lambda v: phi.apply(v.reshape(1, -1))[0], x)
    assert abs(np.linalg.det(J) - 1) <= 1e-6
    lam = PolyMapInterpolant.constant(0.7 + 0.2j, 1)
    psi = OvershearMap(lam, build_interpolant(base, rng.normal(size=4)), axis=1, dim=2)
    J = jacobian_fd(lambda v: psi.apply(v.reshape(1, -1))[0], x)
    assert np.linalg.det(J) == pytest.approx(np.exp(0.7 + 0.2j), abs=1e-6)


def test_send_to_axis_examples():
    one = send_to_axis([[5, 7]])
    assert np.allclose(one.images, [[1, 0]], atol=1e-12)
    two = send_to_axis([[0, 0], [1, 1]])
    assert two.max_residual <= 1e-8
    assert np.allclose(two.images, [[1, 0], [2, 0]], atol=1e-8)


def test_send_to_axis_needs_separating_shear():
    res = send_to_axis([[0, 0], [0, 1], [0, 2]])
    assert res.max_residual <= 1e-8
    assert len(res.chain) == 4


def test_send_to_axis_random_sets(rng):
    for _ in range(5):
        m, n = int(rng.integers(1, 21)), int(rng.integers(2, 4))
        pts = unit_polydisc(rng, m, n)
        res = send_to_axis(pts)
        assert res.max_residual <= 1e-8
        if m > 1:
            d = np.abs(res.images[:, None, 0] - res.images[None, :, 0]) + np.eye(m) * 10
            assert d.min() >= 0.5
        assert res.chain.roundtrip_error(unit_polydisc(rng, 20, n)).error <= 1e-10


def test_send_to_axis_accepts_discrete_set():
    D = DiscreteSet(AmbientSpace.affine(2), (Point.of([0, 1]), Point.of([2, 3])))
    assert send_to_axis(D).max_residual <= 1e-8


def test_send_to_axis_preconditions():
    with pytest.raises(PreconditionError):
        send_to_axis(np.array([[1.0], [2.0]]))
    with pytest.raises(PreconditionError):
        send_to_axis([[1, 1], [1, 1]])


def test_send_to_axis_deterministic():
    pts = [[0, 0], [0, 1], [0, 3j]]
    a, b = send_to_axis(pts), send_to_axis(pts)
    assert a.chain.to_json() == b.chain.to_json()


def test_descriptor_roundtrip(rng):
    res = send_to_axis(unit_polydisc(rng, 6, 3))
    data = res.chain.to_json()
    assert {m["kind"] for m in data["maps"]} == {"shear"}
    again = AutomorphismChain.from_json(data)
    x = unit_polydisc(rng, 5, 3)
    assert np.allclose(again.apply(x), res.chain.apply(x))
    psi = prescribe_fiber_automorphisms([[0], [1]], [(2, 3), (1j, 0)])
    back = map_from_json(psi.to_json())
    assert np.allclose(back.apply(x[:, :2]), psi.apply(x[:, :2]))


def test_prescribe_examples():
    ident = prescribe_fiber_automorphisms([[0], [1], [2]], [(1, 0)] * 3)
    x = np.array([[0.3, 2 + 1j], [5, -1]])
    assert np.allclose(ident.apply(x), x)
    one = prescribe_fiber_automorphisms([[4 + 1j]], [(2, 3)])
    lam, c = fiber_restriction(one, [4 + 1j])
    assert lam == pytest.approx(2) and c == pytest.approx(3)


@given(st.lists(st.tuples(st.floats(0.1, 5), st.floats(-3, 3), st.floats(-5, 5)), min_size=3, max_size=3))
def test_prescribe_three_fibres(data):
    base = [[0], [1], [2j]]
    maps = [(r * np.exp(1j * t), c) for r, t, c in data]
    psi = prescribe_fiber_automorphisms(base, maps)
    for b, (lam, c) in zip(base, maps):
        got_l, got_c = fiber_restriction(psi, b)
        assert abs(got_l - lam) <= 1e-8 * max(1, abs(lam))
        assert abs(got_c - c) <= 1e-8


def test_prescribe_rejects_zero_multiplier():
    with pytest.raises(PreconditionError):
        prescribe_fiber_automorphisms([[0], [1]], [(1, 0), (0, 1)])
