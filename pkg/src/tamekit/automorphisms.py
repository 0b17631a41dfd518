"""Shears and overshears of affine space built from finite interpolation.

Holomorphic interpolation on an infinite discrete set is replaced by a
polynomial in one variable ``s = ell . x``, where ``ell`` is a linear
functional that separates the finitely many base points. The polynomial is
evaluated in the first (modified Lagrange) barycentric form, which returns the
prescribed value exactly whenever ``s`` hits a node and stays backward stable
away from the nodes.

Composed interpolating maps amplify rounding error enormously, so inverse
round-trips are also checked in multiprecision (gmpy2), doubling the working
precision until the requested tolerance is met.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import gmpy2
import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import DiscreteSet, Point, min_pairwise_distance, complex_from_json, complex_to_json
from .errors import PreconditionError

SEED = 0x5EED
MAX_RETRIES = 8
SEPARATION_TOL = 1e-6
ROUNDTRIP_TOL = 1e-10
MAX_BITS = 8192


def _as_matrix(points: Any, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(points, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise PreconditionError(f"expected a list of points, got shape {arr.shape}")
    return arr


def _min_gap(values: np.ndarray) -> float:
    if values.size < 2:
        return np.inf
    diff = np.abs(values[:, None] - values[None, :])
    diff[np.diag_indices_from(diff)] = np.inf
    return float(diff.min())


def _weights(nodes: Sequence[Any]) -> list[Any]:
    out = []
    for k, xk in enumerate(nodes):
        prod = 1
        for i, xi in enumerate(nodes):
            if i != k:
                prod = prod * (xk - xi)
        out.append(1 / prod)
    return out


@dataclass(frozen=True, eq=False)
class PolyMapInterpolant:
    """A polynomial map ``x -> p(ell . x)`` taking prescribed values.

    ``nodes[j]`` is the image of ``base_points[j]`` under the functional and
    ``target_values[j]`` is the prescribed value there.
    """

    base_points: np.ndarray
    target_values: np.ndarray
    functional: np.ndarray
    nodes: np.ndarray
    _mp_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        w = np.array(_weights(list(self.nodes)), dtype=complex)
        object.__setattr__(self, "weights", w)

    @property
    def base_dim(self) -> int:
        return self.functional.shape[0]

    @property
    def target_dim(self) -> int:
        return self.target_values.shape[1]

    @classmethod
    def linear(cls, functional: Sequence[complex]) -> PolyMapInterpolant:
        """The linear form ``x -> ell . x`` itself."""
        ell = np.asarray(functional, dtype=complex).ravel()
        if not np.any(ell):
            raise PreconditionError("zero functional")
        pre = np.conj(ell) / np.vdot(ell, ell).real
        base = np.vstack([np.zeros_like(ell), pre])
        return cls(base, np.array([[0], [1]], dtype=complex), ell, np.array([0, 1], dtype=complex))

    @classmethod
    def constant(cls, value: Iterable[complex] | complex, base_dim: int) -> PolyMapInterpolant:
        vals = np.atleast_1d(np.asarray(value, dtype=complex)).reshape(1, -1)
        ell = np.zeros(base_dim, dtype=complex)
        ell[0] = 1
        return cls(np.zeros((1, base_dim), dtype=complex), vals, ell, np.zeros(1, dtype=complex))

    def project(self, x: Any) -> np.ndarray:
        return _as_matrix(x, self.base_dim) @ self.functional

    def evaluate_nodes(self, s: np.ndarray) -> np.ndarray:
        """Values of the univariate interpolant at the points ``s``."""
        s = np.asarray(s, dtype=complex).ravel()
        m = self.nodes.shape[0]
        if m == 1:
            return np.repeat(self.target_values, s.shape[0], axis=0)
        diff = s[:, None] - self.nodes[None, :]
        hit = diff == 0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ell = np.prod(diff, axis=1)
            terms = self.weights[None, :] / diff
            out = ell[:, None] * (terms @ self.target_values)
        rows, cols = np.nonzero(hit)
        out[rows] = self.target_values[cols]
        return out

    def __call__(self, x: Any) -> np.ndarray:
        """Evaluate at points of shape ``(N, base_dim)``; returns ``(N, target_dim)``."""
        return self.evaluate_nodes(self.project(x))

    def _mp_data(self) -> tuple[list, list, list, list]:
        bits = gmpy2.get_context().precision
        data = self._mp_cache.get(bits)
        if data is None:
            nodes = [gmpy2.mpc(complex(v)) for v in self.nodes]
            ell = [gmpy2.mpc(complex(v)) for v in self.functional]
            vals = [[gmpy2.mpc(complex(v)) for v in row] for row in self.target_values]
            data = (nodes, _weights(nodes), ell, vals)
            self._mp_cache[bits] = data
        return data

    def evaluate_mp(self, x: Sequence[Any]) -> list[Any]:
        """Evaluate at one base point given as gmpy2 ``mpc`` values, at the current precision."""
        nodes, w, ell, vals = self._mp_data()
        s = sum((a * b for a, b in zip(ell, x)), gmpy2.mpc(0))
        if len(nodes) == 1:
            return list(vals[0])
        prod = gmpy2.mpc(1)
        acc = [gmpy2.mpc(0)] * self.target_dim
        for j, node in enumerate(nodes):
            d = s - node
            if d == 0:
                return list(vals[j])
            prod *= d
            t = w[j] / d
            acc = [a + t * v for a, v in zip(acc, vals[j])]
        return [prod * a for a in acc]

    @property
    def coefficients(self) -> np.ndarray:
        """Monomial coefficients in ``s``, lowest degree first, shape ``(m, target_dim)``.

        Informational only: evaluation never goes through this table.
        """
        x = self.nodes
        m = x.shape[0]
        dd = self.target_values.astype(complex).copy()
        for level in range(1, m):
            dd[level:] = (dd[level:] - dd[level - 1 : -1]) / (x[level:] - x[: m - level])[:, None]
        cols = []
        for t in range(self.target_dim):
            poly = np.array([dd[m - 1, t]])
            for k in range(m - 2, -1, -1):
                poly = npoly.polyadd(npoly.polysub(npoly.polymulx(poly), x[k] * poly), [dd[k, t]])
            cols.append(np.pad(poly, (0, m - poly.shape[0])))
        return np.stack(cols, axis=1)

    def to_json(self) -> dict:
        return {
            "functional": [complex_to_json(complex(v)) for v in self.functional],
            "nodes": [complex_to_json(complex(v)) for v in self.nodes],
            "values": [[complex_to_json(complex(v)) for v in row] for row in self.target_values],
            "coeffs": [[complex_to_json(complex(v)) for v in row] for row in self.coefficients],
        }

    @classmethod
    def from_json(cls, data: dict) -> PolyMapInterpolant:
        ell = np.array([complex(complex_from_json(v)) for v in data["functional"]])
        nodes = np.array([complex(complex_from_json(v)) for v in data["nodes"]])
        vals = np.array([[complex(complex_from_json(v)) for v in row] for row in data["values"]])
        return cls(np.zeros((nodes.shape[0], ell.shape[0]), dtype=complex), vals, ell, nodes)


def build_interpolant(
    base_points: Any,
    target_values: Any,
    *,
    seed: int = SEED,
    functional: Sequence[complex] | None = None,
) -> PolyMapInterpolant:
    """Interpolate ``target_values`` at ``base_points`` along a separating functional.

    The first coordinate is tried first, then up to eight seeded random
    functionals. Fails if none separates the points.
    """
    base = _as_matrix(base_points)
    vals = np.asarray(target_values, dtype=complex)
    if vals.ndim == 1:
        vals = vals.reshape(-1, 1)
    if base.shape[0] == 0:
        raise PreconditionError("need at least one base point")
    if vals.shape[0] != base.shape[0]:
        raise PreconditionError("base points and target values differ in length")
    dim = base.shape[1]
    scale = 1.0 + float(np.abs(base).max())
    candidates: list[np.ndarray] = []
    if functional is not None:
        candidates.append(np.asarray(functional, dtype=complex).ravel())
    else:
        e1 = np.zeros(dim, dtype=complex)
        e1[0] = 1
        candidates.append(e1)
        rng = np.random.default_rng(seed)
        for _ in range(MAX_RETRIES):
            candidates.append(rng.normal(size=dim) + 1j * rng.normal(size=dim))
    for ell in candidates:
        nodes = base @ ell
        if _min_gap(nodes) > SEPARATION_TOL * scale * float(np.abs(ell).max()):
            return PolyMapInterpolant(base, vals, ell, nodes)
    raise PreconditionError("no separating functional found")


@dataclass(frozen=True, eq=False)
class ShearMap:
    """``x -> x . f(pi(x))`` for a one-parameter unipotent action.

    ``kind="affine"``: add ``f(x[base])`` to coordinate ``axis`` of ``C^dim``.
    ``kind="sl2"``: right-multiply a 2x2 matrix by ``[[1, f], [0, 1]]``, where
    ``f`` reads the first column.
    """

    f: PolyMapInterpolant
    axis: int = 0
    base: tuple[int, ...] = ()
    dim: int = 2
    kind: str = "affine"

    def __post_init__(self) -> None:
        if self.kind == "sl2":
            object.__setattr__(self, "base", (0, 1))
            object.__setattr__(self, "axis", 1)
            object.__setattr__(self, "dim", 4)
            if self.f.base_dim != 2:
                raise PreconditionError("sl2 shear reads the two entries of the first column")
        elif self.kind == "affine":
            if self.axis in self.base or not (0 <= self.axis < self.dim):
                raise PreconditionError("shear axis must lie outside the base coordinates")
            if len(self.base) != self.f.base_dim:
                raise PreconditionError("interpolant dimension does not match the projection")
        else:
            raise PreconditionError(f"unknown shear kind {self.kind!r}")
        if self.f.target_dim != 1:
            raise PreconditionError("shear function must be scalar")

    def project(self, x: np.ndarray) -> np.ndarray:
        return x[:, list(self.base)]

    def _move(self, x: Any, sign: int) -> np.ndarray:
        if self.kind == "sl2":
            g = np.asarray(x, dtype=complex).reshape(-1, 2, 2)
            t = sign * self.f(g[:, :, 0])[:, 0]
            out = g.copy()
            out[:, :, 1] = g[:, :, 1] + t[:, None] * g[:, :, 0]
            return out
        y = _as_matrix(x, self.dim).copy()
        y[:, self.axis] += sign * self.f(self.project(y))[:, 0]
        return y

    def apply(self, x: Any) -> np.ndarray:
        return self._move(x, 1)

    def invert(self, y: Any) -> np.ndarray:
        return self._move(y, -1)

    def _move_mp(self, v: list, sign: int) -> list:
        if self.kind == "sl2":
            a, b, c, d = v
            t = self.f.evaluate_mp([a, c])[0]
            t = t if sign > 0 else -t
            return [a, b + t * a, c, d + t * c]
        t = self.f.evaluate_mp([v[i] for i in self.base])[0]
        out = list(v)
        out[self.axis] = v[self.axis] + t if sign > 0 else v[self.axis] - t
        return out

    def apply_mp(self, v: list) -> list:
        return self._move_mp(v, 1)

    def invert_mp(self, v: list) -> list:
        return self._move_mp(v, -1)

    def to_json(self) -> dict:
        return {
            "kind": "shear",
            "action": self.kind,
            "projection": "sl2-first-column" if self.kind == "sl2" else list(self.base),
            "axis": self.axis,
            "dim": self.dim,
            "coeffs": self.f.to_json()["coeffs"],
            "interpolant": self.f.to_json(),
        }


@dataclass(frozen=True, eq=False)
class OvershearMap:
    """``(x, z) -> (x, exp(e(x)) z + c(x))`` acting on coordinate ``axis``."""

    lambda_exponent: PolyMapInterpolant
    offset: PolyMapInterpolant
    axis: int
    dim: int

    def __post_init__(self) -> None:
        if not (0 <= self.axis < self.dim):
            raise PreconditionError("axis out of range")
        for f in (self.lambda_exponent, self.offset):
            if f.target_dim != 1 or f.base_dim != self.dim - 1:
                raise PreconditionError("overshear data must be scalar functions of the other coordinates")

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.dim) if i != self.axis)

    def multiplier(self, x: Any) -> np.ndarray:
        """lambda(x) on base points, never zero."""
        return np.exp(self.lambda_exponent(x)[:, 0])

    def apply(self, x: Any) -> np.ndarray:
        y = _as_matrix(x, self.dim).copy()
        b = y[:, list(self.base)]
        y[:, self.axis] = self.multiplier(b) * y[:, self.axis] + self.offset(b)[:, 0]
        return y

    def invert(self, y: Any) -> np.ndarray:
        x = _as_matrix(y, self.dim).copy()
        b = x[:, list(self.base)]
        x[:, self.axis] = (x[:, self.axis] - self.offset(b)[:, 0]) / self.multiplier(b)
        return x

    def apply_mp(self, v: list) -> list:
        b = [v[i] for i in self.base]
        lam = gmpy2.exp(self.lambda_exponent.evaluate_mp(b)[0])
        out = list(v)
        out[self.axis] = lam * v[self.axis] + self.offset.evaluate_mp(b)[0]
        return out

    def invert_mp(self, v: list) -> list:
        b = [v[i] for i in self.base]
        lam = gmpy2.exp(self.lambda_exponent.evaluate_mp(b)[0])
        out = list(v)
        out[self.axis] = (v[self.axis] - self.offset.evaluate_mp(b)[0]) / lam
        return out

    def to_json(self) -> dict:
        return {
            "kind": "overshear",
            "projection": list(self.base),
            "axis": self.axis,
            "dim": self.dim,
            "coeffs": {
                "lambda_exponent": self.lambda_exponent.to_json()["coeffs"],
                "offset": self.offset.to_json()["coeffs"],
            },
            "lambda_exponent": self.lambda_exponent.to_json(),
            "offset": self.offset.to_json(),
        }


AutomorphismMap = ShearMap | OvershearMap


def map_from_json(data: dict) -> AutomorphismMap:
    if data["kind"] == "shear":
        f = PolyMapInterpolant.from_json(data["interpolant"])
        if data.get("action") == "sl2":
            return ShearMap(f, kind="sl2")
        return ShearMap(f, axis=data["axis"], base=tuple(data["projection"]), dim=data["dim"])
    if data["kind"] == "overshear":
        return OvershearMap(
            PolyMapInterpolant.from_json(data["lambda_exponent"]),
            PolyMapInterpolant.from_json(data["offset"]),
            axis=data["axis"],
            dim=data["dim"],
        )
    raise PreconditionError(f"unknown automorphism kind {data['kind']!r}")


def _wrap(p: Any, fn) -> Any:
    if isinstance(p, Point):
        out = fn(np.asarray(p.array(), dtype=complex).reshape(1, -1))
        return Point.of(np.asarray(out).reshape(p.shape))
    arr = np.asarray(p, dtype=complex)
    out = fn(arr.reshape(1, -1) if arr.ndim == 1 else arr)
    return np.asarray(out).reshape(arr.shape)


def apply_shear(phi: ShearMap, p: Any) -> Any:
    """Image of a point (or array of points) under a shear."""
    return _wrap(p, phi.apply)


def apply_overshear(psi: OvershearMap, p: Any) -> Any:
    return _wrap(p, psi.apply)


def invert_overshear(psi: OvershearMap, q: Any) -> Any:
    return _wrap(q, psi.invert)


@dataclass(frozen=True)
class RoundTrip:
    """Worst inverse round-trip error and the precision that achieved it (53 = float)."""

    error: float
    bits: int

    @property
    def ok(self) -> bool:
        return self.error <= ROUNDTRIP_TOL


@dataclass(frozen=True, eq=False)
class AutomorphismChain:
    """Composition applied left to right: ``maps[0]`` acts first."""

    maps: tuple[AutomorphismMap, ...]
    dim: int

    def __len__(self) -> int:
        return len(self.maps)

    def apply(self, x: Any) -> np.ndarray:
        y = _as_matrix(x, self.dim)
        for m in self.maps:
            y = m.apply(y)
        return y

    def invert(self, y: Any) -> np.ndarray:
        x = _as_matrix(y, self.dim)
        for m in reversed(self.maps):
            x = m.invert(x)
        return x

    def apply_mp(self, v: list) -> list:
        for m in self.maps:
            v = m.apply_mp(v)
        return v

    def invert_mp(self, v: list) -> list:
        for m in reversed(self.maps):
            v = m.invert_mp(v)
        return v

    def roundtrip_error(
        self, probes: Any, *, tol: float = ROUNDTRIP_TOL, max_bits: int = MAX_BITS
    ) -> RoundTrip:
        """Max over probes of ``|x - inv(apply(x))|``, raising precision until within ``tol``."""
        x = _as_matrix(probes, self.dim)
        with np.errstate(all="ignore"):
            back = self.invert(self.apply(x))
            err = float(np.max(np.linalg.norm(back - x, axis=1)))
        if np.isfinite(err) and err <= tol:
            return RoundTrip(err, 53)
        bits = 128
        while True:
            with gmpy2.context(gmpy2.get_context(), precision=bits):
                worst = 0.0
                for row in x:
                    v = [gmpy2.mpc(complex(c)) for c in row]
                    w = self.invert_mp(self.apply_mp(v))
                    d = max(abs(complex(a - b)) for a, b in zip(w, v))
                    worst = max(worst, d)
            if worst <= tol or bits >= max_bits:
                return RoundTrip(worst, bits)
            bits *= 2

    def to_json(self) -> dict:
        return {"dim": self.dim, "maps": [m.to_json() for m in self.maps]}

    @classmethod
    def from_json(cls, data: dict) -> AutomorphismChain:
        return cls(tuple(map_from_json(m) for m in data["maps"]), data["dim"])


@dataclass(frozen=True, eq=False)
class AxisPlacement:
    """Result of :func:`send_to_axis` with its residual certificate."""

    chain: AutomorphismChain
    images: np.ndarray
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    def certificate_csv(self) -> str:
        lines = ["j,residual"]
        lines += [f"{j},{r:.6e}" for j, r in enumerate(self.residuals, start=1)]
        return "\n".join(lines) + "\n"


def _points_of(D: Any) -> np.ndarray:
    if isinstance(D, DiscreteSet):
        if not D.space.affine:
            raise PreconditionError("send_to_axis works in affine space")
        return np.asarray(D.array, dtype=complex).reshape(len(D.points), -1)
    return _as_matrix(D)


def send_to_axis(D: Any, *, seed: int = SEED) -> AxisPlacement:
    """Shears of ``C^n`` (n >= 2) carrying the j-th point to ``(j, 0, ..., 0)``.

    All but two of the maps are exact at the data because their nodes are the
    current first coordinates; the remaining linear steps add one rounding each.
    """
    x = _points_of(D)
    m, n = x.shape
    if m < 1:
        raise PreconditionError("need at least one point")
    if n < 2:
        raise PreconditionError("send_to_axis needs dimension at least 2")
    scale = 1.0 + float(np.abs(x).max())
    if min_pairwise_distance(x) <= 1e-9 * scale:
        raise PreconditionError("points are not pairwise distinct")
    maps: list[AutomorphismMap] = []
    y = x.copy()

    def push(phi: AutomorphismMap) -> None:
        nonlocal y
        maps.append(phi)
        y = phi.apply(y)

    if _min_gap(y[:, 0]) <= SEPARATION_TOL * scale:
        rng = np.random.default_rng(seed)
        for _ in range(MAX_RETRIES):
            a = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
            trial = y[:, 0] + y[:, 1:] @ a
            if _min_gap(trial) > SEPARATION_TOL * scale:
                push(ShearMap(PolyMapInterpolant.linear(a), axis=0, base=tuple(range(1, n)), dim=n))
                break
        else:
            raise PreconditionError("no separating functional found")

    one = np.array([1.0 + 0j])
    j = np.arange(1, m + 1, dtype=complex)
    for i in range(2, n):
        f = build_interpolant(y[:, :1], -y[:, i], functional=one)
        push(ShearMap(f, axis=i, base=(0,), dim=n))
    f = build_interpolant(y[:, :1], j - y[:, 1], functional=one)
    push(ShearMap(f, axis=1, base=(0,), dim=n))
    g = build_interpolant(y[:, 1:2], j - y[:, 0], functional=one)
    push(ShearMap(g, axis=0, base=(1,), dim=n))
    push(ShearMap(PolyMapInterpolant.linear([-1.0]), axis=1, base=(0,), dim=n))

    target = np.zeros((m, n), dtype=complex)
    target[:, 0] = j
    chain = AutomorphismChain(tuple(maps), n)
    images = chain.apply(x)
    residuals = np.linalg.norm(images - target, axis=1)
    return AxisPlacement(chain, images, residuals)


def prescribe_fiber_automorphisms(
    base_points: Any,
    fiber_maps: Sequence[tuple[complex, complex]],
    *,
    axis: int | None = None,
    seed: int = SEED,
) -> OvershearMap:
    """Overshear whose restriction to the fibre over the k-th base point is ``z -> lam_k z + c_k``.

    lambda is the exponential of an interpolant of principal logarithms, so
    it never vanishes. The section is trivial, so the offset interpolates the
    ``c_k`` directly.
    """
    base = _as_matrix(base_points)
    if len(fiber_maps) != base.shape[0]:
        raise PreconditionError("one fibre map per base point is required")
    lams = [complex(l) for l, _ in fiber_maps]
    if any(l == 0 for l in lams):
        raise PreconditionError("fibre multipliers must be nonzero")
    logs = [cmath.log(l) for l in lams]
    cs = [complex(c) for _, c in fiber_maps]
    e = build_interpolant(base, logs, seed=seed)
    c = build_interpolant(base, cs, functional=e.functional)
    dim = base.shape[1] + 1
    return OvershearMap(e, c, axis=dim - 1 if axis is None else axis, dim=dim)


def fiber_restriction(psi: OvershearMap, base_point: Any) -> tuple[complex, complex]:
    """``(lambda, c)`` of the fibre map over one base point."""
    b = _as_matrix(base_point, psi.dim - 1).reshape(1, -1)
    return complex(psi.multiplier(b)[0]), complex(psi.offset(b)[0, 0])


def jacobian_fd(fn, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Complex Jacobian of a holomorphic map by central differences."""
    x = np.asarray(x, dtype=complex).ravel()
    n = x.shape[0]
    J = np.empty((n, n), dtype=complex)
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = h
        J[:, k] = (fn(x + e) - fn(x - e)).ravel() / (2 * h)
    return J
