"""Finite-scale computations around tame discrete sets.

Submodules:

- ``core``: ambient spaces, points, discrete sets, exhaustion functions
- ``nevanlinna``: counting functions, threshold sequences, growth functions
- ``automorphisms``: interpolating shears and overshears
- ``rootsys``: root systems, subgroup pairs, ad-nilpotent families
- ``sl2``: unipotent conjugation and word balls in SL_2
- ``arithmetic``: imaginary quadratic rings and denominator bounds
- ``generators``: partitions and the torus counterexample
"""

from .core import AmbientSpace, DiscreteSet, Point, rho
from .errors import ConsistencyError, PreconditionError, TamekitError

__all__ = [
    "AmbientSpace",
    "ConsistencyError",
    "DiscreteSet",
    "Point",
    "PreconditionError",
    "TamekitError",
    "rho",
]
__version__ = "0.1.0"
