"""Finite cubical cell complexes and cellular cochains over Z and F2.

Complexes are cubes [0,1]^n and their torus quotients, plus raw incidence
input.  Cube cells are labeled by patterns over {'0','1','*'} (one symbol per
coordinate: pinned at 0, pinned at 1, or free); torus cells identify opposite
faces, so their patterns use {'0','*'} only and every boundary map vanishes
by opposite-face cancellation.

Integer homology questions (is a cocycle a coboundary, Betti numbers) go
through a naive Smith normal form, which is plenty at rank <= ~100.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

__all__ = [
    "CellComplexError",
    "CellComplex",
    "CellCochain",
    "build_point",
    "build_interval",
    "build_cube",
    "build_torus",
    "complex_from_incidence",
    "coboundary",
    "is_cocycle",
    "cohomologous",
    "pair_fundamental",
    "class_from_cell_counts",
    "betti_numbers",
    "smith_normal_form",
    "solve_integer",
]


class CellComplexError(ValueError):
    pass


@dataclass(frozen=True)
class Cell:
    id: str
    dim: int
    # (lows, highs): the geometric support as a subcube of [0,1]^n
    lows: tuple
    highs: tuple

    @property
    def free_axes(self):
        return tuple(i for i, (a, b) in enumerate(zip(self.lows, self.highs)) if a != b)


class CellComplex:
    """Cells per dimension plus integer boundary matrices with dd = 0."""

    def __init__(self, cells, boundary, identifications=None, kind="raw"):
        self.cells = list(cells)
        self.boundary = {
            int(d): np.asarray(m, dtype=np.int64) for d, m in boundary.items()
        }
        self.identifications = identifications or []
        self.kind = kind
        self._by_dim = {}
        for c in self.cells:
            self._by_dim.setdefault(c.dim, []).append(c)
        self._validate()

    def _validate(self):
        for d, mat in self.boundary.items():
            lower = len(self.cells_of_dim(d - 1))
            upper = len(self.cells_of_dim(d))
            if mat.shape != (lower, upper):
                raise CellComplexError(
                    f"boundary[{d}] has shape {mat.shape}, expected ({lower},{upper})"
                )
        for d in self.boundary:
            prev = self.boundary.get(d - 1)
            if prev is not None and prev.size and self.boundary[d].size:
                if np.any(prev @ self.boundary[d]):
                    raise CellComplexError(f"dd != 0 between dimensions {d} and {d-2}")

    @property
    def dim(self) -> int:
        return max(c.dim for c in self.cells)

    def cells_of_dim(self, d):
        return self._by_dim.get(d, [])

    def cell(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(cell_id)

    def to_json(self):
        return {
            "kind": self.kind,
            "cells": [
                {"id": c.id, "dim": c.dim, "lows": list(c.lows), "highs": list(c.highs)}
                for c in self.cells
            ],
            "boundary": {str(d): m.tolist() for d, m in self.boundary.items()},
            "identifications": self.identifications,
        }


def _pattern_cells(n, symbols):
    cells = []
    for pat in product(symbols, repeat=n):
        lows = tuple(0.0 if s in "0*" else 1.0 for s in pat)
        highs = tuple(1.0 if s in "1*" else 0.0 for s in pat)
        dim = sum(1 for s in pat if s == "*")
        cells.append(Cell(id="".join(pat) or "pt", dim=dim, lows=lows, highs=highs))
    return cells


def _cube_boundary(cells, torus):
    """Cubical boundary: d(c) = sum_j (-1)^(j-1) (face_1^j - face_0^j) over the
    free axes j in increasing order.  On the torus both faces are one cell."""
    by_dim = {}
    for c in cells:
        by_dim.setdefault(c.dim, []).append(c)
    idx = {d: {c.id: i for i, c in enumerate(cs)} for d, cs in by_dim.items()}
    boundary = {}
    for d in sorted(by_dim):
        if d == 0:
            continue
        mat = np.zeros((len(by_dim[d - 1]), len(by_dim[d])), dtype=np.int64)
        for j, c in enumerate(by_dim[d]):
            pat = list(c.id if c.id != "pt" else "")
            sign = 1
            for axis, s in enumerate(pat):
                if s != "*":
                    continue
                for face_val, face_sign in (("1", sign), ("0", -sign)):
                    fp = pat[:]
                    fp[axis] = "0" if torus else face_val
                    fid = "".join(fp) or "pt"
                    mat[idx[d - 1][fid], j] += face_sign
                sign = -sign
        boundary[d] = mat
    return boundary


def build_point() -> CellComplex:
    return CellComplex(_pattern_cells(0, "*"), {}, kind="point")


def build_cube(n: int) -> CellComplex:
    """[0,1]^n with 3^n cells (each coordinate pinned at 0, 1, or free)."""
    if n < 0:
        raise CellComplexError("n must be nonnegative")
    if n == 0:
        return build_point()
    cells = _pattern_cells(n, "01*")
    return CellComplex(cells, _cube_boundary(cells, torus=False), kind="cube")


def build_torus(n: int) -> CellComplex:
    """T^n as the cube with opposite faces identified: 2^n cells, one per
    subset of free axes."""
    if not 1 <= n <= 4:
        raise CellComplexError("torus dimension must be between 1 and 4")
    cells = _pattern_cells(n, "0*")
    idents = [{"axis": i, "from": "face_1", "to": "face_0"} for i in range(n)]
    return CellComplex(
        cells, _cube_boundary(cells, torus=True), identifications=idents, kind="torus"
    )


def build_interval() -> CellComplex:
    return build_cube(1)


def complex_from_incidence(cell_dims, boundary) -> CellComplex:
    """Raw CW input: (id, dim) pairs plus incidence matrices; dd = 0 is
    validated, geometric supports are left empty."""
    cells = [Cell(id=str(cid), dim=int(d), lows=(), highs=()) for cid, d in cell_dims]
    return CellComplex(cells, boundary, kind="raw")


_RINGS = ("Z", "F2")


@dataclass(eq=False)
class CellCochain:
    """Degree-d assignment of ring elements to the d-cells of a complex."""

    complex: CellComplex
    degree: int
    ring: str
    values: dict

    def __post_init__(self):
        if self.ring not in _RINGS:
            raise CellComplexError(f"ring must be one of {_RINGS}")
        ids = {c.id for c in self.complex.cells_of_dim(self.degree)}
        extra = set(self.values) - ids
        if extra:
            raise CellComplexError(
                f"values on non-{self.degree}-cells: {sorted(extra)}"
            )
        norm = {}
        for c in self.complex.cells_of_dim(self.degree):
            v = int(self.values.get(c.id, 0))
            norm[c.id] = v % 2 if self.ring == "F2" else v
        self.values = norm

    def vector(self) -> np.ndarray:
        return np.array(
            [self.values[c.id] for c in self.complex.cells_of_dim(self.degree)],
            dtype=np.int64,
        )

    def is_zero(self) -> bool:
        return not any(self.values.values())

    def __eq__(self, other):
        return (
            isinstance(other, CellCochain)
            and self.complex is other.complex
            and self.degree == other.degree
            and self.ring == other.ring
            and self.values == other.values
        )

    def to_json(self):
        return {"degree": self.degree, "ring": self.ring, "values": dict(self.values)}


def _delta_matrix(cx: CellComplex, degree: int) -> np.ndarray:
    """Matrix of the coboundary from degree-d to degree-(d+1) cochains."""
    bnd = cx.boundary.get(degree + 1)
    lower = len(cx.cells_of_dim(degree))
    upper = len(cx.cells_of_dim(degree + 1))
    if bnd is None:
        return np.zeros((upper, lower), dtype=np.int64)
    return bnd.T.copy()


def coboundary(c: CellCochain) -> CellCochain:
    """(delta c)(e) = c(boundary e); raises the degree by one."""
    cx = c.complex
    mat = _delta_matrix(cx, c.degree)
    vec = mat @ c.vector()
    upper = cx.cells_of_dim(c.degree + 1)
    return CellCochain(
        cx, c.degree + 1, c.ring, {cell.id: int(v) for cell, v in zip(upper, vec)}
    )


def is_cocycle(c: CellCochain) -> bool:
    return coboundary(c).is_zero()


def cohomologous(c1: CellCochain, c2: CellCochain) -> bool:
    """Whether c1 - c2 is a coboundary (same degree and ring, both cocycles)."""
    if c1.complex is not c2.complex or c1.degree != c2.degree or c1.ring != c2.ring:
        raise CellComplexError("cochains must live on one complex, degree, and ring")
    if not (is_cocycle(c1) and is_cocycle(c2)):
        raise CellComplexError("cohomologous requires cocycle inputs")
    diff = c1.vector() - c2.vector()
    mat = _delta_matrix(c1.complex, c1.degree - 1)
    if c1.ring == "F2":
        return _solvable_mod2(mat % 2, diff % 2)
    return solve_integer(mat, diff) is not None


def pair_fundamental(c: CellCochain, orientation=None):
    """Pair a top-degree cocycle with the fundamental class: sum of signed
    top-cell values.  ``orientation`` maps top-cell id -> +-1 (default +1)."""
    cx = c.complex
    if c.degree != cx.dim:
        raise CellComplexError(
            f"pairing needs a top-degree cochain (degree {cx.dim}, got {c.degree})"
        )
    orientation = orientation or {}
    total = sum(
        int(orientation.get(cell.id, 1)) * c.values[cell.id]
        for cell in cx.cells_of_dim(c.degree)
    )
    return total % 2 if c.ring == "F2" else total


def class_from_cell_counts(cx: CellComplex, counts: dict, ring: str) -> CellCochain:
    """Assemble a cochain from per-cell counts (degree read off the counts).

    Every cell of that degree must be supplied; when the complex has cells
    above the degree the result is checked to be a cocycle.
    """
    if not counts:
        raise CellComplexError("counts must be nonempty")
    by_id = {c.id: c for c in cx.cells}
    missing = [cid for cid in counts if cid not in by_id]
    if missing:
        raise CellComplexError(f"counts name unknown cells: {missing}")
    degs = {by_id[cid].dim for cid in counts}
    if len(degs) != 1:
        raise CellComplexError("counts must all sit in one dimension")
    n = degs.pop()
    expected = {c.id for c in cx.cells_of_dim(n)}
    absent = expected - set(counts)
    if absent:
        raise CellComplexError(f"missing counts for cells: {sorted(absent)}")
    out = CellCochain(cx, n, ring, dict(counts))
    if cx.dim > n and not is_cocycle(out):
        raise CellComplexError("assembled counts do not form a cocycle")
    return out


def _solvable_mod2(a: np.ndarray, b: np.ndarray) -> bool:
    a = a.copy() % 2
    b = b.copy() % 2
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        b[[r, piv]] = b[[piv, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] + a[r]) % 2
                b[i] = (b[i] + b[r]) % 2
        r += 1
    return not any(b[i] and not a[i].any() for i in range(rows))


class _SnfState:
    def __init__(self, a):
        self.a = [[int(x) for x in row] for row in a]
        self.rows = len(self.a)
        self.cols = len(self.a[0]) if self.rows else 0
        self.u = [[int(i == j) for j in range(self.rows)] for i in range(self.rows)]
        self.v = [[int(i == j) for j in range(self.cols)] for i in range(self.cols)]

    def swap_rows(self, i, j):
        self.a[i], self.a[j] = self.a[j], self.a[i]
        self.u[i], self.u[j] = self.u[j], self.u[i]

    def swap_cols(self, i, j):
        for row in self.a:
            row[i], row[j] = row[j], row[i]
        for row in self.v:
            row[i], row[j] = row[j], row[i]

    def add_row(self, dst, src, k):
        self.a[dst] = [x + k * y for x, y in zip(self.a[dst], self.a[src])]
        self.u[dst] = [x + k * y for x, y in zip(self.u[dst], self.u[src])]

    def add_col(self, dst, src, k):
        for row in self.a:
            row[dst] += k * row[src]
        for row in self.v:
            row[dst] += k * row[src]

    def clear_at(self, t):
        """Euclidean steps until a[t][t] divides out its row and column."""
        a = self.a
        while True:
            done = True
            for i in range(t + 1, self.rows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    self.add_row(i, t, -q)
                    if a[i][t]:
                        self.swap_rows(t, i)
                        done = False
            for j in range(t + 1, self.cols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    self.add_col(j, t, -q)
                    if a[t][j]:
                        self.swap_cols(t, j)
                        done = False
            if done:
                return


def smith_normal_form(a):
    """Naive Smith normal form over Z.

    Returns (s, u, v) with u @ a @ v = s, u and v unimodular, s diagonal with
    nonnegative entries dividing down the diagonal.  Python ints throughout.
    """
    st = _SnfState(np.atleast_2d(np.asarray(a, dtype=object)))
    k = min(st.rows, st.cols)
    t = 0
    while t < k:
        piv = next(
            (
                (i, j)
                for i in range(t, st.rows)
                for j in range(t, st.cols)
                if st.a[i][j]
            ),
            None,
        )
        if piv is None:
            break
        st.swap_rows(t, piv[0])
        st.swap_cols(t, piv[1])
        st.clear_at(t)
        t += 1
    # divisibility fix-up: fold d_{i+1} into column i and re-reduce
    changed = True
    while changed:
        changed = False
        for i in range(t - 1):
            x, y = st.a[i][i], st.a[i + 1][i + 1]
            if x and y % x != 0:
                st.add_col(i, i + 1, 1)
                st.clear_at(i)
                st.clear_at(i + 1)
                changed = True
    for i in range(k):
        if st.a[i][i] < 0:
            st.a[i] = [-x for x in st.a[i]]
            st.u[i] = [-x for x in st.u[i]]
    return (
        np.array(st.a, dtype=object),
        np.array(st.u, dtype=object),
        np.array(st.v, dtype=object),
    )


def solve_integer(a, b):
    """An integer solution x of a x = b, or None if none exists."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size == 0:
        if b.any():
            return None
        return np.zeros(a.shape[1] if a.ndim == 2 else 0, dtype=np.int64)
    s, u, v = smith_normal_form(a)
    ub = u @ b.astype(object)
    rows, cols = s.shape
    y = [0] * cols
    for i in range(rows):
        d = s[i][i] if i < cols else 0
        if d:
            if ub[i] % d != 0:
                return None
            y[i] = ub[i] // d
        elif ub[i] != 0:
            return None
    x = v @ np.array(y, dtype=object)
    return np.array([int(t) for t in x], dtype=np.int64)


def _rank_q(a) -> int:
    if a.size == 0:
        return 0
    s, _, _ = smith_normal_form(a)
    return int(sum(1 for i in range(min(s.shape)) if s[i][i] != 0))


def _rank_f2(a) -> int:
    if a.size == 0:
        return 0
    m = a.copy() % 2
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i, c]), None)
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] = (m[i] + m[r]) % 2
        r += 1
    return r


def betti_numbers(cx: CellComplex, ring: str = "Z"):
    """Betti numbers b_0..b_dim over Q (ring='Z') or over F2."""
    rank = _rank_q if ring == "Z" else _rank_f2
    out = []
    for d in range(cx.dim + 1):
        nd = len(cx.cells_of_dim(d))
        rd = rank(cx.boundary[d]) if d in cx.boundary else 0
        rd1 = rank(cx.boundary[d + 1]) if (d + 1) in cx.boundary else 0
        out.append(nd - rd - rd1)
    return out
