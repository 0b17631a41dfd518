"""Small exact linear algebra over Fraction (or any field type with + - * /)."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Sequence


def _rows(matrix: Sequence[Sequence[Any]]) -> list[list[Any]]:
    return [[x if not isinstance(x, int) else Fraction(x) for x in row] for row in matrix]


def row_reduce(matrix: Sequence[Sequence[Any]]) -> tuple[list[list[Any]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = _rows(matrix)
    if not a:
        return a, []
    nrows, ncols = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def rank(matrix: Sequence[Sequence[Any]]) -> int:
    return len(row_reduce(matrix)[1])


def nullspace(matrix: Sequence[Sequence[Any]]) -> list[list[Fraction]]:
    """Basis of the right kernel {x : A x = 0}."""
    a, pivots = row_reduce(matrix)
    ncols = len(matrix[0]) if matrix else 0
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(a, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve_left(rows: Sequence[Sequence[Any]], target: Sequence[Any]) -> list[Fraction] | None:
    """Coefficients c with sum_i c_i * rows[i] == target, or None if inconsistent."""
    m = len(rows)
    if m == 0:
        return [] if all(t == 0 for t in target) else None
    # Columns of the augmented system are the given rows.
    aug = [[rows[i][j] for i in range(m)] + [target[j]] for j in range(len(target))]
    red, pivots = row_reduce(aug)
    if m in pivots:
        return None
    sol = [Fraction(0)] * m
    for row, pc in zip(red, pivots):
        sol[pc] = row[m]
    return sol


def det(matrix: Sequence[Sequence[Any]]) -> Any:
    """Determinant by fraction-exact elimination."""
    a = _rows(matrix)
    n = len(a)
    result: Any = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            result = -result
        result = result * a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return result


def primitive_integer_vector(v: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints
