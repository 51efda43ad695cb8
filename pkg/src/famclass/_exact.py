"""Exact linear algebra over the rationals.

Small dense problems only (rank up to ~100); everything is a plain list of
lists of ``fractions.Fraction``.  No floating point enters any function here,
which is what makes the inertia, orientation-sign, and mapping-degree
computations certificates rather than estimates.
"""

from __future__ import annotations

from fractions import Fraction


def frac_matrix(rows):
    """Copy a matrix-like of ints/Fractions into Fraction lists."""
    return [[Fraction(x) for x in row] for row in rows]


def identity(n):
    return [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        for t in range(k):
            x = ai[t]
            if x:
                bt = b[t]
                oi = out[i]
                for j in range(m):
                    oi[j] += x * bt[j]
    return out


def mat_vec(a, v):
    return [sum(a[i][j] * v[j] for j in range(len(v))) for i in range(len(a))]


def transpose(a):
    return [list(col) for col in zip(*a)]


def det(a):
    """Determinant by fraction-free-ish Gaussian elimination (exact)."""
    n = len(a)
    m = [row[:] for row in a]
    sign = 1
    d = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        p = m[col][col]
        d *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                mr, mc = m[r], m[col]
                for c in range(col, n):
                    mr[c] -= f * mc[c]
    return sign * d


def solve(a, b):
    """Solve a x = b exactly; returns None if a is singular."""
    n = len(a)
    m = [a[i][:] + [Fraction(b[i])] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col] / p
                mr, mc = m[r], m[col]
                for c in range(col, n + 1):
                    mr[c] -= f * mc[c]
    return [m[i][n] / m[i][i] for i in range(n)]


def rank(a):
    if not a or not a[0]:
        return 0
    m = [row[:] for row in a]
    nrows, ncols = len(m), len(m[0])
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][col]
        for i in range(nrows):
            if i != r and m[i][col]:
                f = m[i][col] / p
                for c in range(col, ncols):
                    m[i][c] -= f * m[r][c]
        r += 1
        if r == nrows:
            break
    return r


def symmetric_inertia(gram, pivot_order=None):
    """Diagonalize a symmetric rational matrix by congruence (Sylvester).

    Returns ``(b_plus, b_minus, basis)`` where ``basis`` is a list of
    ``(vector, pivot_value)`` pairs: row vectors v (coordinates in the
    original basis) with v^T G v = pivot and mutual G-orthogonality.
    ``pivot_order`` optionally permutes which index is reduced first;
    the inertia counts are invariant under it (Sylvester's law), which
    the tests exercise.

    Raises ArithmeticError if a fully zero block remains while active
    indices are left; impossible for a nondegenerate form, so hitting it
    means the input (or this routine) is broken.
    """
    n = len(gram)
    a = frac_matrix(gram)
    p = identity(n)  # maintains a = p G p^T
    order = list(pivot_order) if pivot_order is not None else list(range(n))
    if sorted(order) != list(range(n)):
        raise ValueError("pivot_order must be a permutation of range(rank)")
    active = order[:]
    b_plus = b_minus = 0
    basis = []
    while active:
        k = next((i for i in active if a[i][i] != 0), None)
        if k is None:
            # all active diagonals vanish; graft an off-diagonal entry on
            pair = next(
                ((i, j) for i in active for j in active if i != j and a[i][j] != 0),
                None,
            )
            if pair is None:
                raise ArithmeticError(
                    "zero block with active indices remaining; form is degenerate"
                )
            i, j = pair
            for c in range(n):
                a[i][c] += a[j][c]
            for r in range(n):
                a[r][i] += a[r][j]
            for c in range(n):
                p[i][c] += p[j][c]
            k = i
        piv = a[k][k]
        for r in active:
            if r == k or a[r][k] == 0:
                continue
            f = a[r][k] / piv
            for c in range(n):
                a[r][c] -= f * a[k][c]
            for c in range(n):
                a[c][r] -= f * a[c][k]
            for c in range(n):
                p[r][c] -= f * p[k][c]
        if piv > 0:
            b_plus += 1
        else:
            b_minus += 1
        basis.append((p[k][:], piv))
        active.remove(k)
    return b_plus, b_minus, basis
