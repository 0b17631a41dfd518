"""Counting functions, threshold sequences and the growth function built from them.

Run with ``python3 demos/counting_and_thresholds.py``; each cell prints what it found.
"""

# %% Counting a lattice in C
from __future__ import annotations

import numpy as np

from tamekit.core import AmbientSpace, DiscreteSet
from tamekit.nevanlinna import (
    check_threshold_condition,
    counting_N,
    counting_N_integral,
    counting_profile,
    h_from_thresholds,
    log_grid,
    sequence_for_h,
    threshold_sum,
    verify_r2h_contrapositive,
)

side = np.arange(-20, 21)
lattice = (side[:, None] + 1j * side[None, :]).ravel()
D = DiscreteSet.from_arrays(AmbientSpace.affine(1), lattice[:, None], label="Z[i] box")
profile = counting_profile(D, log_grid(100.0, per_decade=4))
print(profile.to_csv())

# %% The sum of log+ terms agrees with the integral of n(t)/t
for r in (2.0, 10.0, 50.0):
    print(f"r={r:5.1f}  sum={counting_N(D, r):.10f}  integral={counting_N_integral(D, r):.10f}")

# A square lattice has n(t) ~ pi t^2, so N(r) grows like (pi/2) r^2: far from tame.

# %% Threshold sequence for h(r) = (log r)^2
h = lambda r: np.log(r) ** 2
R = sequence_for_h(h, 8, 1e10)
print("R_k:", ", ".join(f"{x:.4g}" for x in R.values))
grid = np.geomspace(1, 1e10, 9)[1:]
for r, s in zip(grid, threshold_sum(R, grid)):
    print(f"  r={r:9.3g}  sum log+(r/R_k)={s:8.3f}  h(r)={h(r):8.3f}")

# %% The growth function built back from the thresholds
hk = h_from_thresholds(R, len(R))
for row in hk.table():
    print({k: round(v, 4) for k, v in row.items()})
print("invariant violations:", hk.invariant_violations())

# %% A set that crowds an R_k ball is caught by N(p_k) >= h(p_k)
k = 4
crowd = np.full(k + 1, R[k - 1] * 0.99)
print(check_threshold_condition(crowd, R))
print(verify_r2h_contrapositive(crowd, R, len(R)))
