# Intersection lattices and formal dimensions
#
# A closed oriented 4-manifold enters famclass as (b1, Gram matrix of the
# cup product on H^2 mod torsion).  Everything downstream -- b+, signature,
# parity, the index formulas for the two gauge-theory equations -- is exact
# integer/rational arithmetic on that matrix.

import numpy as np

from famclass.fourman import (
    FourManifoldDescriptor,
    SO3Class,
    SpinCClass,
    b_plus,
    connected_sum,
    euler_char,
    formal_dim_asd,
    formal_dim_sw,
    group_membership,
    homeo_invariants_match,
    standard_manifold,
)
from famclass.lattice import build_lattice, inertia, parity, positive_orientation_sign

# The stock lattices: the hyperbolic plane H, the E8 form, and diagonal
# blocks.  K3 is three hyperbolic planes plus two negative E8's.
k3 = standard_manifold("K3")
print("K3:", "rank", k3.lattice.rank, "inertia", inertia(k3.lattice),
      "parity", parity(k3.lattice), "chi", euler_char(k3))

# The spin dimension count: d = (c1^2 - 2 chi - 3 sign)/4, an exact integer
# whenever c1 is characteristic.  For the spin class (c1 = 0) on K3 the
# moduli dimension is zero; every S2xS2 summand drops it by one.
x = k3
spin = SpinCClass([0] * 22)
print("d(K3, spin) =", formal_dim_sw(x, spin))
for n in range(1, 5):
    x, spin = connected_sum(x, standard_manifold("S2xS2"), spin, SpinCClass([0, 0]))
    print(f"d(K3 # {n}(S2xS2), spin) = {formal_dim_sw(x, spin)}   b+ = {b_plus(x)}")

# The SO(3) side: d = -2 p1 - 3(1 - b1 + b+), needing w2 != 0.
m0 = FourManifoldDescriptor(
    "M0", b1=0,
    lattice=build_lattice([{"type": "diag", "entries": [1, 1, 1, -1, -1, -1]}]),
)
p0 = SO3Class(p1=-6, w2=[1, 1, 0, 0, 0, 0])
print("d(M0, p1=-6) =", formal_dim_asd(m0, p0))

# A diffeomorphism acts on H^2 as a lattice isometry.  Whether it fixes the
# auxiliary class and whether it preserves the orientation of the positive
# part decide the structure group, and hence the coefficient ring: Z when
# the homology orientation survives, F2 otherwise.
two = connected_sum(k3, standard_manifold("S2xS2"))[0]
flip = np.eye(24, dtype=int)
flip[22:, 22:] = -np.eye(2, dtype=int)
print("orientation sign of the block flip:",
      positive_orientation_sign(two.lattice, flip))
report = group_membership(two, SpinCClass([0] * 24), flip)
print("membership:", report)

# Homeomorphism-invariant sanity: K3 # n(CP2 # 2(-CP2)) carries the same
# (b1, b+, b-, parity) data as (n+3)CP2 # (2n+19)(-CP2) -- the dissolve
# phenomenon that powers the composition scenarios.
for n in (1, 2):
    lhs = k3
    for _ in range(n):
        lhs, _ = connected_sum(lhs, standard_manifold("CP2+2(-CP2)"))
    rhs = FourManifoldDescriptor(
        f"({n+3})CP2 # ({2*n+19})(-CP2)", b1=0,
        lattice=build_lattice(
            [{"type": "diag", "entries": [1] * (n + 3) + [-1] * (2 * n + 19)}]
        ),
    )
    match, table = homeo_invariants_match(lhs, rhs)
    print(f"n={n}: invariants match: {match}  {table}")
