"""Integral symmetric bilinear forms (intersection lattices of 4-manifolds).

A lattice is H^2(X;Z)/torsion with its cup-product Gram matrix.  Everything
here is exact: inertia comes from a rational congruence diagonalization, the
orientation sign of an isometry on the positive part is a rational
determinant, and no tolerance appears anywhere.
"""

from __future__ import annotations

import numpy as np

from . import _exact

__all__ = [
    "LatticeError",
    "IntegerLattice",
    "H_GRAM",
    "E8_GRAM",
    "build_lattice",
    "inertia",
    "parity",
    "is_characteristic",
    "is_isometry",
    "positive_orientation_sign",
    "positive_subspace_basis",
    "direct_sum",
    "lattice_to_json",
    "lattice_from_json",
]


class LatticeError(ValueError):
    """Invalid lattice data or operation precondition failure."""


H_GRAM = np.array([[0, 1], [1, 0]], dtype=np.int64)

# Even, unimodular, positive definite, rank 8 (Dynkin-diagram Gram matrix;
# chain 1-3-4-5-6-7-8 with 2 attached to 4).
E8_GRAM = np.array(
    [
        [2, 0, -1, 0, 0, 0, 0, 0],
        [0, 2, 0, -1, 0, 0, 0, 0],
        [-1, 0, 2, -1, 0, 0, 0, 0],
        [0, -1, -1, 2, -1, 0, 0, 0],
        [0, 0, 0, -1, 2, -1, 0, 0],
        [0, 0, 0, 0, -1, 2, -1, 0],
        [0, 0, 0, 0, 0, -1, 2, -1],
        [0, 0, 0, 0, 0, 0, -1, 2],
    ],
    dtype=np.int64,
)


class IntegerLattice:
    """A nondegenerate symmetric integer matrix, with its block provenance.

    ``gram`` is read-only; ``blocks`` records how the lattice was assembled
    (used for JSON round-trips) and is a single custom block for raw input.
    """

    def __init__(self, gram, blocks=None):
        g = np.asarray(gram, dtype=np.int64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise LatticeError(f"gram must be square, got shape {g.shape}")
        if not np.array_equal(g, g.T):
            raise LatticeError("gram must be symmetric")
        if g.shape[0] > 0 and _exact.det(_exact.frac_matrix(g.tolist())) == 0:
            raise LatticeError("gram must be nondegenerate (determinant != 0)")
        g.setflags(write=False)
        self.gram = g
        self.blocks = blocks if blocks is not None else [
            {"type": "custom", "gram": g.tolist()}
        ]

    @property
    def rank(self) -> int:
        return self.gram.shape[0]

    def determinant(self) -> int:
        d = _exact.det(_exact.frac_matrix(self.gram.tolist()))
        return int(d)

    def __eq__(self, other):
        return isinstance(other, IntegerLattice) and np.array_equal(
            self.gram, other.gram
        )

    def __repr__(self):
        return f"IntegerLattice(rank={self.rank})"


def _block_gram(spec, index):
    if isinstance(spec, str):
        spec = {"type": spec}
    btype = spec.get("type")
    if btype == "H":
        return H_GRAM.copy()
    if btype == "E8":
        return int(spec.get("sign", 1)) * E8_GRAM.copy()
    if btype == "diag":
        entries = spec["entries"]
        if any(e == 0 for e in entries):
            raise LatticeError(f"block {index}: zero diagonal entry")
        return np.diag(np.asarray(entries, dtype=np.int64))
    if btype == "custom":
        g = np.asarray(spec["gram"], dtype=np.int64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise LatticeError(f"block {index}: custom gram must be square")
        if not np.array_equal(g, g.T):
            raise LatticeError(f"block {index}: custom gram not symmetric")
        if _exact.det(_exact.frac_matrix(g.tolist())) == 0:
            raise LatticeError(f"block {index}: custom gram is singular")
        return g
    raise LatticeError(f"block {index}: unknown block type {btype!r}")


def build_lattice(blocks) -> IntegerLattice:
    """Direct sum of standard blocks, in order.

    Each block is a dict ``{"type": "H"|"E8"|"diag"|"custom", ...}`` or a
    string shorthand.  ``"count"`` repeats a block.  Examples: the hyperbolic
    plane ``{"type": "H"}``, the K3 form ``[{"type":"H","count":3},
    {"type":"E8","sign":-1,"count":2}]``.
    """
    grams = []
    norm_blocks = []
    for i, spec in enumerate(blocks):
        if isinstance(spec, str):
            spec = {"type": spec}
        count = int(spec.get("count", 1))
        g = _block_gram(spec, i)
        for _ in range(count):
            grams.append(g)
            norm_blocks.append({k: v for k, v in spec.items() if k != "count"})
    n = sum(g.shape[0] for g in grams)
    full = np.zeros((n, n), dtype=np.int64)
    pos = 0
    for g in grams:
        r = g.shape[0]
        full[pos : pos + r, pos : pos + r] = g
        pos += r
    return IntegerLattice(full, blocks=norm_blocks)


def inertia(lat: IntegerLattice):
    """(b_plus, b_minus, signature) by exact rational diagonalization."""
    b_plus, b_minus, _ = _exact.symmetric_inertia(lat.gram.tolist())
    return b_plus, b_minus, b_plus - b_minus


def parity(lat: IntegerLattice) -> str:
    """'even' iff x.x is even for all x, i.e. all diagonal entries even."""
    return "even" if all(int(d) % 2 == 0 for d in np.diag(lat.gram)) else "odd"


def _check_vector(lat, v):
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (lat.rank,):
        raise LatticeError(
            f"vector length {v.shape} does not match lattice rank {lat.rank}"
        )
    return v


def is_characteristic(lat: IntegerLattice, v) -> bool:
    """True iff v.x = x.x mod 2 for every basis vector x."""
    v = _check_vector(lat, v)
    gv = lat.gram @ v
    return all(int(gv[i] - lat.gram[i, i]) % 2 == 0 for i in range(lat.rank))


def _check_map(lat, m):
    m = np.asarray(m, dtype=np.int64)
    if m.shape != (lat.rank, lat.rank):
        raise LatticeError(
            f"map shape {m.shape} does not match lattice rank {lat.rank}"
        )
    return m


def is_isometry(lat: IntegerLattice, m) -> bool:
    """Exact test of M^T G M = G."""
    m = _check_map(lat, m)
    return np.array_equal(m.T @ lat.gram @ m, lat.gram)


def positive_subspace_basis(lat: IntegerLattice, pivot_order=None):
    """Rational basis (list of row vectors) of a maximal positive subspace.

    Taken from the congruence diagonalization; different pivot orders give
    different subspaces, all maximal positive definite.
    """
    _, _, basis = _exact.symmetric_inertia(lat.gram.tolist(), pivot_order)
    return [vec for vec, piv in basis if piv > 0]


def positive_orientation_sign(lat: IntegerLattice, m, pivot_order=None) -> int:
    """Sign of the isometry's action on the orientation of the positive part.

    Computed as sign det(B^T G M B) for a rational basis B of a maximal
    positive subspace V; that determinant equals det of projection-onto-V
    composed with M restricted to V, up to the positive factor det(B^T G B).
    Independent of the choice of V.
    """
    m = _check_map(lat, m)
    if not is_isometry(lat, m):
        raise LatticeError("positive_orientation_sign requires an isometry")
    basis = positive_subspace_basis(lat, pivot_order)
    if not basis:
        return 1
    g = _exact.frac_matrix(lat.gram.tolist())
    mf = _exact.frac_matrix(m.tolist())
    b = [list(v) for v in basis]  # rows span V
    gmb = _exact.mat_mul(g, _exact.mat_mul(mf, _exact.transpose(b)))
    d = _exact.det(_exact.mat_mul(b, gmb))
    if d == 0:
        raise LatticeError("degenerate projection; input is not a true isometry")
    return 1 if d > 0 else -1


def direct_sum(a: IntegerLattice, b: IntegerLattice) -> IntegerLattice:
    n, m = a.rank, b.rank
    full = np.zeros((n + m, n + m), dtype=np.int64)
    full[:n, :n] = a.gram
    full[n:, n:] = b.gram
    return IntegerLattice(full, blocks=list(a.blocks) + list(b.blocks))


def lattice_to_json(lat: IntegerLattice) -> dict:
    return {"blocks": [dict(b) for b in lat.blocks]}


def lattice_from_json(data) -> IntegerLattice:
    return build_lattice(data["blocks"])
