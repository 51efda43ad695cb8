"""Closed oriented 4-manifold descriptors and their formal dimensions.

A descriptor is (b1, intersection lattice); together with an auxiliary class
(a characteristic vector c1, or an SO(3) pair (p1, w2)) it determines the
index of the linearized gauge-theory equations.  Structure-group membership
of a lattice isometry is decided at the level of H^2: does it fix the class,
and does it preserve the orientation of the positive part.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    IntegerLattice,
    LatticeError,
    build_lattice,
    direct_sum,
    inertia,
    is_characteristic,
    is_isometry,
    lattice_from_json,
    lattice_to_json,
    parity,
    positive_orientation_sign,
)

__all__ = [
    "FourManifoldDescriptor",
    "SpinCClass",
    "SO3Class",
    "MembershipReport",
    "euler_char",
    "b_plus",
    "formal_dim_sw",
    "formal_dim_asd",
    "connected_sum",
    "group_membership",
    "homeo_invariants_match",
    "check_bplus_condition",
    "standard_manifold",
    "descriptor_to_json",
    "descriptor_from_json",
]


@dataclass(frozen=True)
class FourManifoldDescriptor:
    name: str
    b1: int
    lattice: IntegerLattice

    def __post_init__(self):
        if self.b1 < 0:
            raise LatticeError("b1 must be nonnegative")


@dataclass(frozen=True)
class SpinCClass:
    """First Chern class of a spin-c structure, in the lattice basis."""

    c1: tuple

    def __init__(self, c1):
        object.__setattr__(self, "c1", tuple(int(x) for x in c1))

    def vector(self):
        return np.asarray(self.c1, dtype=np.int64)


@dataclass(frozen=True)
class SO3Class:
    """SO(3)-bundle data: integer p1 and the mod-2 class w2."""

    p1: int
    w2: tuple

    def __init__(self, p1, w2):
        object.__setattr__(self, "p1", int(p1))
        object.__setattr__(self, "w2", tuple(int(x) % 2 for x in w2))

    def w2_vector(self):
        return np.asarray(self.w2, dtype=np.int64)


@dataclass(frozen=True)
class MembershipReport:
    preserves_class: bool
    preserves_homology_orientation: bool
    coefficient_ring: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "coefficient_ring",
            "Z" if self.preserves_homology_orientation else "F2",
        )


def euler_char(x: FourManifoldDescriptor) -> int:
    """Betti sum for a closed oriented 4-manifold: 2 - 2*b1 + b2."""
    return 2 - 2 * x.b1 + x.lattice.rank


def b_plus(x: FourManifoldDescriptor) -> int:
    return inertia(x.lattice)[0]


def formal_dim_sw(x: FourManifoldDescriptor, s: SpinCClass) -> int:
    """(c1^2 - 2*chi - 3*sign)/4; exact integer for characteristic c1."""
    if not is_characteristic(x.lattice, s.vector()):
        raise LatticeError(
            f"c1 = {s.c1} is not characteristic for the lattice of {x.name!r}"
        )
    c1 = s.vector()
    c1sq = int(c1 @ x.lattice.gram @ c1)
    sign = inertia(x.lattice)[2]
    num = c1sq - 2 * euler_char(x) - 3 * sign
    if num % 4 != 0:
        # characteristic c1 on a unimodular form forces divisibility; a
        # remainder means the lattice is not an intersection form of a
        # closed oriented 4-manifold (or there is an arithmetic bug)
        raise ArithmeticError(
            f"dimension formula not divisible by 4 ({num}); the lattice of "
            f"{x.name!r} is not unimodular or is corrupted"
        )
    return num // 4


def validate_so3(x: FourManifoldDescriptor, p: SO3Class, strict: bool = False):
    """Check w2 != 0 and the p1 = w2^2 (mod 4) consistency.

    The mod-4 check uses the naive 0/1 integer lift of w2 and is a warning
    unless strict; exotic what-if descriptors may violate it on purpose.
    """
    if all(v == 0 for v in p.w2):
        raise LatticeError("ASD setting requires nonzero w2")
    if len(p.w2) != x.lattice.rank:
        raise LatticeError("w2 length does not match lattice rank")
    lift = p.w2_vector()
    w2sq = int(lift @ x.lattice.gram @ lift)
    if (p.p1 - w2sq) % 4 != 0:
        msg = f"p1 = {p.p1} is not congruent to w2^2 = {w2sq} mod 4"
        if strict:
            raise LatticeError(msg)
        warnings.warn(msg, stacklevel=2)


def formal_dim_asd(
    x: FourManifoldDescriptor, p: SO3Class, strict: bool = False
) -> int:
    """-2*p1 - 3*(1 - b1 + b_plus); requires nonzero w2."""
    validate_so3(x, p, strict=strict)
    return -2 * p.p1 - 3 * (1 - x.b1 + b_plus(x))


def connected_sum(x1, x2, class1=None, class2=None):
    """Connected sum of descriptors, with class data glued blockwise.

    Lattices take the orthogonal direct sum, b1 adds, c1's concatenate,
    (p1, w2)'s add/concatenate.  Returns (descriptor, glued class) or just
    the descriptor when no classes are given.
    """
    lat = direct_sum(x1.lattice, x2.lattice)
    out = FourManifoldDescriptor(
        name=f"{x1.name} # {x2.name}", b1=x1.b1 + x2.b1, lattice=lat
    )
    if class1 is None and class2 is None:
        return out, None
    if isinstance(class1, SpinCClass) and isinstance(class2, SpinCClass):
        return out, SpinCClass(class1.c1 + class2.c1)
    if isinstance(class1, SO3Class) and isinstance(class2, SO3Class):
        return out, SO3Class(class1.p1 + class2.p1, class1.w2 + class2.w2)
    raise LatticeError("connected_sum needs classes of the same kind")


def group_membership(
    x: FourManifoldDescriptor, klass, m, h1_sign: int = 1
) -> MembershipReport:
    """Does the isometry fix the auxiliary class, and the homology orientation?

    ``h1_sign`` is the user-supplied sign of the map on H^1 (only meaningful
    when b1 > 0; it is not derivable from H^2 data).
    """
    m = np.asarray(m, dtype=np.int64)
    if not is_isometry(x.lattice, m):
        raise LatticeError("group_membership requires an isometry")
    if isinstance(klass, SpinCClass):
        preserves = bool(np.array_equal(m @ klass.vector(), klass.vector()))
    elif isinstance(klass, SO3Class):
        # p1 is a number, automatically fixed; only w2 can move
        mw = (m @ klass.w2_vector()) % 2
        preserves = bool(np.array_equal(mw, klass.w2_vector()))
    else:
        raise LatticeError(f"unknown class kind {type(klass).__name__}")
    sign = positive_orientation_sign(x.lattice, m)
    if x.b1 > 0:
        sign *= 1 if h1_sign >= 0 else -1
    return MembershipReport(
        preserves_class=preserves, preserves_homology_orientation=(sign == 1)
    )


def homeo_invariants_match(x: FourManifoldDescriptor, y: FourManifoldDescriptor):
    """Compare (b1, b+, b-, parity); returns (verdict, per-invariant report)."""
    ix, iy = inertia(x.lattice), inertia(y.lattice)
    report = {
        "b1": (x.b1, y.b1),
        "b_plus": (ix[0], iy[0]),
        "b_minus": (ix[1], iy[1]),
        "parity": (parity(x.lattice), parity(y.lattice)),
    }
    return all(a == b for a, b in report.values()), report


def check_bplus_condition(x: FourManifoldDescriptor, n: int) -> bool:
    """The family-dimension hypothesis b+ >= n + 2."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return b_plus(x) >= n + 2


_STANDARD = {
    "K3": (0, [{"type": "H", "count": 3}, {"type": "E8", "sign": -1, "count": 2}]),
    "S2xS2": (0, [{"type": "H"}]),
    "CP2": (0, [{"type": "diag", "entries": [1]}]),
    "-CP2": (0, [{"type": "diag", "entries": [-1]}]),
    "CP2+2(-CP2)": (0, [{"type": "diag", "entries": [1, -1, -1]}]),
}


def standard_manifold(name: str) -> FourManifoldDescriptor:
    """Descriptors for the stock manifolds: K3, S2xS2, CP2, -CP2, CP2+2(-CP2)."""
    if name not in _STANDARD:
        raise KeyError(f"no standard manifold named {name!r}")
    b1, blocks = _STANDARD[name]
    return FourManifoldDescriptor(name=name, b1=b1, lattice=build_lattice(blocks))


def descriptor_to_json(x: FourManifoldDescriptor) -> dict:
    return {"name": x.name, "b1": x.b1, "lattice": lattice_to_json(x.lattice)}


def descriptor_from_json(data) -> FourManifoldDescriptor:
    return FourManifoldDescriptor(
        name=data["name"],
        b1=int(data.get("b1", 0)),
        lattice=lattice_from_json(data["lattice"]),
    )
