"""famclass: desk-scale invariants of 4-manifold bundles.

Intersection-lattice arithmetic, gauge-theoretic formal dimensions, a
finite-dimensional section-counting engine with per-cell cochain assembly,
exact wall-crossing mapping degrees, and the composition parity that drives
the torus-bundle nonvanishing scenarios.
"""

from . import cli, cochain, fourman, lattice, manifest, scenarios, vnengine, wallcross
from .errors import (
    CocycleError,
    FamClassError,
    HypothesisError,
    PropernessError,
    StabilityError,
    TransversalityError,
    WallError,
)

__version__ = "0.1.0"

__all__ = [
    "cli",
    "cochain",
    "fourman",
    "lattice",
    "manifest",
    "scenarios",
    "vnengine",
    "wallcross",
    "FamClassError",
    "HypothesisError",
    "StabilityError",
    "TransversalityError",
    "PropernessError",
    "CocycleError",
    "WallError",
    "__version__",
]
