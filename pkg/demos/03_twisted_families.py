# Families over tori, twisted by face transitions, and their cochains
#
# A family over T^n is a family over the cube [0,1]^n together with
# invertible fiber/target maps gluing opposite faces (mapping-torus
# monodromy).  Per-cell zero counts of the total map assemble into a
# cellular cochain on the torus; the twisted circle family is the smallest
# nonvanishing example, and products of it generate higher torus classes.

import numpy as np

from famclass.cochain import build_cube, pair_fundamental
from famclass.vnengine import (
    assemble_twisted_family,
    builtin_family,
    family_class,
    family_from_polynomials,
    pullback_circle_family,
)

# The twisted circle family: fiber R, target R + a line glued by -1.  The
# section (x, 1 - 2b) descends because 1 - 2b flips sign end to end; it has
# one transverse zero over the open cell, so the cochain is the generator.
moebius = builtin_family("moebius-1")
klass = family_class(moebius, ring="F2")
print("twisted circle family:", klass.values,
      "pairing with [T^1]:", pair_fundamental(klass))
print("orientation-consistent transitions?", moebius.orientation_consistent,
      "(so integer counts are refused; parity it is)")

# The untwisted product with the same index never vanishes: zero cochain.
trivial = builtin_family("product-trivial-1")
print("untwisted product:", family_class(trivial, ring="F2").values)

# Products of the twisted family give the generator of H^n(T^n; F2).
for n in (2, 3):
    fam = builtin_family("moebius-prod-n", n=n)
    kn = family_class(fam, ring="F2")
    print(f"product of {n} twists:", kn.values)

# Naturality: pulling back along the degree-k self-map of the circle
# multiplies the class by k (mod 2 here).
for k in (1, 2, 3):
    pb = pullback_circle_family(moebius, k)
    print(f"pullback along degree {k}:", family_class(pb, ring='F2').values)

# Build your own twisted family: components in the tiny polynomial grammar,
# transitions as matrices.  Consistency (descent + commuting transitions)
# is checked at assembly; a mismatched gluing is rejected.
mine = family_from_polynomials(
    ["x1", "3 - 6*b1"],  # same twist, scaled section
    build_cube(1),
    fiber_dim=1,
    properness_radius=2.0,
    transitions={0: (np.eye(1), np.diag([1.0, -1.0]))},
    name="my-twist",
)
print("user-built twist:", family_class(mine, ring="F2").values)

try:
    family_from_polynomials(
        ["x1", "1 - 2*b1"], build_cube(1), 1, 2.0,
        transitions={0: (np.eye(1), np.eye(2))},  # wrong gluing for this section
    )
except Exception as err:
    print("rejected:", err)
