"""Moving a finite set in C^2 onto the points (1,0), (2,0), ... with shears.

Run with ``python3 demos/axis_placement.py``.
"""

# %% A random finite set
from __future__ import annotations

import numpy as np

from tamekit.automorphisms import OvershearMap, PolyMapInterpolant, fiber_restriction, send_to_axis

rng = np.random.default_rng(7)
pts = rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2))
print(np.round(pts, 3))

# %% The chain of shears and where it sends each point
place = send_to_axis(pts)
print(f"{len(place.chain.maps)} maps in the chain")
for m in place.chain.maps:
    print(" ", type(m).__name__, "axis", m.axis)
print(np.round(place.images, 12))
print(place.certificate_csv())

# %% Inverting the chain on fresh probes
probes = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
rt = place.chain.roundtrip_error(probes)
print(f"round-trip error {rt.error:.2e} using {rt.bits or 'float'} {'bits' if rt.bits else ''}")

# %% An overshear scales one coordinate by exp(lambda) along the fibres
lam = PolyMapInterpolant.constant(np.log(2.0), 1)
c = PolyMapInterpolant.constant(1.0, 1)
psi = OvershearMap(lam, c, axis=1, dim=2)
print("fibre over x=0.5 acts as z -> a z + b with (a, b) =", fiber_restriction(psi, [0.5]))
