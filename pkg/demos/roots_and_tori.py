"""Root-subgroup pairs that generate, and tori where proper projections fail.

Run with ``python3 demos/roots_and_tori.py``.
"""

# %% Positive roots and the pair (H, I) for A3
from __future__ import annotations

import itertools

import numpy as np

from tamekit import rootsys
from tamekit.generators import first_morphisms, torus_counterexample

RS = rootsys.build_root_system("A", 3)
print("positive roots:", RS.positive_roots)
pair = rootsys.build_pair(RS, 0, 2)
print("label counts:", pair.counts())
print(rootsys.verify_spanning(pair, RS))

# %% Every ordered pair of distinct simple roots spans, across the classical families
for fam, n in (("A", 3), ("B", 3), ("C", 3), ("D", 4)):
    RS = rootsys.build_root_system(fam, n)
    spans = [rootsys.verify_spanning(rootsys.build_pair(RS, a, b), RS).spans
             for a, b in itertools.permutations(range(n), 2)]
    print(f"{fam}{n}: dim {RS.lie_dim}, {sum(spans)}/{len(spans)} pairs span")

# %% Nilpotent elements spanning sl_n
for n in (2, 3, 4):
    fam = rootsys.nilcone_spanning_family(n)
    print(n, all(map(rootsys.ad_nilpotent, fam)), rootsys.family_rank(fam), n * n - 1)

# %% A set in (C*)^2 meeting thresholds yet dense in the image of every morphism listed
print([F.exponent_matrix for F in first_morphisms(2, 3)])
R = np.arange(2.0, 62.0)
res = torus_counterexample(2, R, J=3, target_density=4, K=60)
print("threshold condition:", res.thresholds_ok, " worst target distance:", max(res.proximity))
print("first rho values:", np.round(res.rhos[:6], 2))
