"""Ambient spaces, points, finite discrete sets and their exhaustion functions.

Every space gets one canonical exhaustion function, normalised to be >= 1:

* affine space C^n: ``max(1, |p|)``;
* SL_n: ``max(1, |g|_F, |g^-1|_F)``;
* the torus (C*)^n, viewed as diagonal matrices: same as SL_n on ``diag(p)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import _exact
from .errors import PreconditionError
from .gaussian import GaussianRational

DET_TOL = 1e-9
DISTINCT_TOL = 1e-9

_KINDS = ("affine", "sl", "torus")


@dataclass(frozen=True)
class AmbientSpace:
    kind: str
    dim: int

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise PreconditionError(f"unknown space kind {self.kind!r}")
        if not isinstance(self.dim, int) or self.dim < 1:
            raise PreconditionError(f"{self.kind} dimension must be a positive integer")
        if self.kind == "sl" and self.dim < 2:
            raise PreconditionError("SL_n needs n >= 2")

    @classmethod
    def affine(cls, dim: int) -> AmbientSpace:
        return cls("affine", dim)

    @classmethod
    def sl(cls, n: int) -> AmbientSpace:
        return cls("sl", n)

    @classmethod
    def torus(cls, n: int) -> AmbientSpace:
        return cls("torus", n)

    @property
    def point_shape(self) -> tuple[int, ...]:
        return (self.dim, self.dim) if self.kind == "sl" else (self.dim,)

    def to_json(self) -> dict[str, Any]:
        key = "dim" if self.kind == "affine" else "n"
        return {"kind": self.kind, key: self.dim}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> AmbientSpace:
        kind = obj.get("kind")
        size = obj.get("dim", obj.get("n"))
        if size is None:
            raise PreconditionError("space needs 'dim' or 'n'")
        return cls(kind, int(size))


@dataclass(frozen=True)
class Point:
    """A point of C^n (shape ``(n,)``) or an n x n matrix (shape ``(n, n)``).

    Coordinates are a flat row-major tuple of ``complex`` (float mode) or
    :class:`GaussianRational` (exact mode); mixing is not allowed.
    """

    coords: tuple
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        if math.prod(self.shape) != len(self.coords):
            raise PreconditionError("coordinate count does not match shape")
        kinds = {isinstance(c, GaussianRational) for c in self.coords}
        if len(kinds) > 1:
            raise PreconditionError("point mixes exact and float coordinates")

    @classmethod
    def of(cls, values: Any) -> Point:
        """Float point from anything array-like."""
        arr = np.asarray(values, dtype=complex)
        return cls(tuple(complex(x) for x in arr.ravel()), arr.shape)

    @classmethod
    def exact(cls, values: Any) -> Point:
        """Exact point; entries are coerced to Gaussian rationals."""
        rows = values
        if rows and isinstance(rows[0], (list, tuple)):
            shape = (len(rows), len(rows[0]))
            flat = [x for row in rows for x in row]
        else:
            shape = (len(rows),)
            flat = list(rows)
        return cls(tuple(GaussianRational.coerce(x) for x in flat), shape)

    @property
    def is_exact(self) -> bool:
        return bool(self.coords) and isinstance(self.coords[0], GaussianRational)

    def array(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coords], dtype=complex).reshape(self.shape)

    def rows(self) -> list[list[Any]]:
        if len(self.shape) == 1:
            return [list(self.coords)]
        n = self.shape[1]
        return [list(self.coords[i * n:(i + 1) * n]) for i in range(self.shape[0])]


def validate_point(space: AmbientSpace, p: Point) -> None:
    if p.shape != space.point_shape:
        raise PreconditionError(f"point of shape {p.shape} does not lie in {space}")
    if space.kind == "torus" and any(not c for c in p.coords):
        raise PreconditionError("torus coordinates must be nonzero")
    if space.kind == "sl":
        if p.is_exact:
            if _exact.det(p.rows()) != 1:
                raise PreconditionError("exact SL point must have determinant exactly 1")
        elif abs(np.linalg.det(p.array()) - 1) > DET_TOL:
            raise PreconditionError("SL point has |det - 1| > 1e-9")


def min_pairwise_distance(arr: np.ndarray) -> float:
    """Smallest Euclidean distance between rows of a complex array (inf if < 2 rows)."""
    arr = np.asarray(arr, dtype=complex)
    if arr.shape[0] < 2:
        return math.inf
    flat = arr.reshape(arr.shape[0], -1)
    real = np.concatenate([flat.real, flat.imag], axis=1)
    dist, _ = cKDTree(real).query(real, k=2)
    return float(dist[:, 1].min())


def nearest_neighbour_distances(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=complex)
    if arr.shape[0] < 2:
        return np.full(arr.shape[0], math.inf)
    flat = arr.reshape(arr.shape[0], -1)
    real = np.concatenate([flat.real, flat.imag], axis=1)
    dist, _ = cKDTree(real).query(real, k=2)
    return dist[:, 1]


@dataclass(frozen=True)
class DiscreteSet:
    space: AmbientSpace
    points: tuple[Point, ...]
    label: str = ""
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if not self.validate:
            return
        modes = {p.is_exact for p in self.points}
        if len(modes) > 1:
            raise PreconditionError("set mixes exact and float points")
        for p in self.points:
            validate_point(self.space, p)
        if self.is_exact:
            if len(set(self.points)) != len(self.points):
                raise PreconditionError("points are not pairwise distinct")
        elif len(self.points) > 1 and min_pairwise_distance(self.array) < DISTINCT_TOL:
            raise PreconditionError("points closer than 1e-9")

    @classmethod
    def from_arrays(cls, space: AmbientSpace, arrays: Iterable[Any], label: str = "") -> DiscreteSet:
        return cls(space, tuple(Point.of(a) for a in arrays), label)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def is_exact(self) -> bool:
        return bool(self.points) and self.points[0].is_exact

    @cached_property
    def array(self) -> np.ndarray:
        shape = (len(self.points),) + self.space.point_shape
        if not self.points:
            return np.zeros(shape, dtype=complex)
        return np.stack([p.array() for p in self.points])

    def subset(self, indices: Iterable[int], label: str | None = None) -> DiscreteSet:
        pts = tuple(self.points[i] for i in indices)
        return DiscreteSet(self.space, pts, self.label if label is None else label, validate=False)


# -- exhaustion functions ---------------------------------------------------

def _as_array(p: Any) -> np.ndarray:
    if isinstance(p, Point):
        return p.array()
    return np.asarray(p, dtype=complex)


def rho_affine(p: Any, dim: int | None = None) -> float:
    arr = _as_array(p)
    if arr.ndim != 1 or (dim is not None and arr.shape[0] != dim):
        raise PreconditionError(f"expected a vector of length {dim}, got shape {arr.shape}")
    return max(1.0, float(np.linalg.norm(arr)))


def rho_group(g: Any) -> float:
    arr = _as_array(g)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise PreconditionError("rho_group needs a square matrix")
    try:
        inv = np.linalg.inv(arr)
    except np.linalg.LinAlgError as exc:
        raise PreconditionError("singular matrix") from exc
    if not np.all(np.isfinite(inv)):
        raise PreconditionError("singular matrix")
    return max(1.0, float(np.linalg.norm(arr)), float(np.linalg.norm(inv)))


def rho_torus(p: Any) -> float:
    arr = _as_array(p)
    if arr.ndim != 1:
        raise PreconditionError("torus point must be a vector")
    if np.any(arr == 0):
        raise PreconditionError("torus coordinates must be nonzero")
    return max(1.0, float(np.linalg.norm(arr)), float(np.linalg.norm(1.0 / arr)))


def rho(space: AmbientSpace, p: Any) -> float:
    if space.kind == "affine":
        return rho_affine(p, space.dim)
    if space.kind == "sl":
        return rho_group(p)
    return rho_torus(p)


def rho_values(D: DiscreteSet) -> np.ndarray:
    """Vectorised exhaustion values of every point, in point order."""
    arr = D.array
    if len(D) == 0:
        return np.zeros(0)
    kind = D.space.kind
    if kind == "affine":
        norms = np.linalg.norm(arr, axis=1)
        return np.maximum(1.0, norms)
    if kind == "torus":
        if np.any(arr == 0):
            raise PreconditionError("torus coordinates must be nonzero")
        return np.maximum.reduce([np.ones(len(D)), np.linalg.norm(arr, axis=1),
                                  np.linalg.norm(1.0 / arr, axis=1)])
    try:
        inv = np.linalg.inv(arr)
    except np.linalg.LinAlgError as exc:
        raise PreconditionError("singular matrix in set") from exc
    return np.maximum.reduce([np.ones(len(D)), np.linalg.norm(arr, axis=(1, 2)),
                              np.linalg.norm(inv, axis=(1, 2))])


@dataclass(frozen=True)
class DiscreteReport:
    min_separation: float
    count_in_ball: int


def certify_discrete(D: DiscreteSet, radius: float) -> DiscreteReport:
    """Minimum separation and point count inside the exhaustion ball of ``radius``."""
    if radius < 1:
        raise PreconditionError("radius must be >= 1")
    if len(D) == 0:
        return DiscreteReport(math.inf, 0)
    inside = rho_values(D) <= radius
    count = int(inside.sum())
    return DiscreteReport(min_pairwise_distance(D.array[inside]), count)


# -- JSON point-set schema --------------------------------------------------

def _real_from_json(x: Any) -> Fraction | float:
    if isinstance(x, dict):
        den = int(x.get("den", 1))
        if den <= 0:
            raise PreconditionError("exact denominators must be positive")
        return Fraction(int(x["num"]), den)
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise PreconditionError(f"bad real value {x!r}")
    return float(x)


def _complex_from_json(z: Any) -> GaussianRational | complex:
    if not (isinstance(z, (list, tuple)) and len(z) == 2):
        raise PreconditionError(f"complex numbers are [re, im] pairs, got {z!r}")
    re, im = (_real_from_json(v) for v in z)
    if isinstance(re, Fraction) and isinstance(im, Fraction):
        return GaussianRational(re, im)
    if isinstance(re, Fraction) or isinstance(im, Fraction):
        raise PreconditionError("a complex number mixes exact and float parts")
    return complex(re, im)


def _real_to_json(x: Fraction) -> dict[str, int]:
    return {"num": x.numerator, "den": x.denominator}


def complex_to_json(z: Any) -> list:
    if isinstance(z, GaussianRational):
        return [_real_to_json(z.real), _real_to_json(z.imag)]
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(z: Any) -> GaussianRational | complex:
    return _complex_from_json(z)


def point_from_json(space: AmbientSpace, obj: Sequence) -> Point:
    if space.kind == "sl":
        rows = [[_complex_from_json(z) for z in row] for row in obj]
        flat = [z for row in rows for z in row]
        shape = (len(rows), len(rows[0]) if rows else 0)
    else:
        flat = [_complex_from_json(z) for z in obj]
        shape = (len(flat),)
    return Point(tuple(flat), shape)


def point_to_json(p: Point) -> list:
    if len(p.shape) == 1:
        return [complex_to_json(z) for z in p.coords]
    return [[complex_to_json(z) for z in row] for row in p.rows()]


def point_set_from_json(obj: dict[str, Any]) -> DiscreteSet:
    if "space" not in obj or "points" not in obj:
        raise PreconditionError("point set needs 'space' and 'points'")
    space = AmbientSpace.from_json(obj["space"])
    points = tuple(point_from_json(space, p) for p in obj["points"])
    return DiscreteSet(space, points, str(obj.get("label", "")))


def point_set_to_json(D: DiscreteSet) -> dict[str, Any]:
    return {
        "space": D.space.to_json(),
        "points": [point_to_json(p) for p in D.points],
        "label": D.label,
    }


def load_point_set(path: str | Path) -> DiscreteSet:
    with open(path) as fh:
        return point_set_from_json(json.load(fh))


def dump_point_set(D: DiscreteSet, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(point_set_to_json(D), fh, indent=1)
        fh.write("\n")
