"""Word balls in SL2(Z[i]): unipotent conjugates, discrete first columns, integrality.

Run with ``python3 demos/sl2_discreteness.py``.
"""

# %% Growth of word balls over the standard generators
from __future__ import annotations

import time
from fractions import Fraction

from tamekit.arithmetic import first_column_map, matrix_group_ball_integrality, min_nonzero_norm
from tamekit.sl2 import (
    conjugate_unipotent,
    enumerate_ball,
    projection_discreteness,
    standard_generators_zi,
)

gens = standard_generators_zi()
for L in range(0, 7, 2):
    t0 = time.perf_counter()
    ball = enumerate_ball(gens, L)
    print(f"L={L}: {len(ball):6d} elements  ({time.perf_counter() - t0:.2f} s)")

# %% Conjugates of the basic unipotent depend only on the first column
g = ball.elements[-1]
conj = conjugate_unipotent(g)
print("g =", g.rows())
print("g U g^-1 =", conj.closed_form.rows(), " trace", conj.closed_form.trace())
print("agrees with the direct product:", conj.closed_form == conj.product)

# %% Distinct first columns are at least 1 apart
report = projection_discreteness(ball, 1e6)
print(f"{report.count} distinct columns, squared minimum separation {report.min_separation_sq}")
print(report.to_csv().splitlines()[:5])

# %% A rational quotient map stays in (1/N) Z[i]
for d in (1, 2, 3, 7, 11):
    w = min_nonzero_norm(d)
    print(f"d={d:2d}: smallest nonzero |z| in the ring is {w.min_abs:.4f}")
rep = matrix_group_ball_integrality(ball, first_column_map(1, scale=Fraction(1, 3)))
print(f"N={rep.N}, {rep.checked} elements, images separated by {rep.min_separation:.4f}")
