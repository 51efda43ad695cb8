"""Wall-crossing degrees, bound ledgers, and composition parity.

The wall model: a family of self-dual-class representatives sigma(t) over
[0,1]^n, paired against n classes gamma_i through the lattice Gram matrix,
giving a map Psi . sigma : ([0,1]^n, boundary) -> (R^n, R^n \\ 0).  Its
mapping degree is computed by piecewise-linear ray counting on a triangulated
boundary, exactly over the rationals whenever sigma is rational-valued:
integer answers come with integer certificates, never floating winding
integrals.

The reflection family realizes the long-neck construction behind the torus
nonvanishing computation: per coordinate, a positive-square class that is
dragged to its image under an orientation-part-reversing isometry.  In
exact-limit mode the localized representatives are replaced by their
cohomology classes; in ledger mode the face pairings carry explicit C/T error
intervals and every sign decision must clear its interval.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _exact
from .errors import StabilityError, WallError
from .lattice import IntegerLattice, build_lattice, is_isometry

__all__ = [
    "WallFamily",
    "BoundLedger",
    "FaceCertificate",
    "CompositionTable",
    "DegreeResult",
    "GluingCount",
    "psi",
    "f_rs",
    "reflect",
    "boundary_degree",
    "reflection_family",
    "reflection_consistency_check",
    "face_sign_degree",
    "ledger_certificate",
    "composition_sum",
    "binom_parity",
    "gluing_count",
]

MAX_RAY_REDRAWS = 8


class _RayDegenerate(Exception):
    """Internal: the sampled ray hit a measure-zero configuration."""


@dataclass
class WallFamily:
    """A section of self-dual classes over the parameter cube.

    ``sigma(t)`` takes a tuple of n Fractions (or floats) and returns the
    class in lattice coordinates; exact families return Fractions and get
    exact degree certificates.
    """

    n: int
    lattice: IntegerLattice
    gammas: tuple  # n lattice vectors
    sigma: object  # callable t -> coordinate sequence
    name: str = ""
    ledger: "BoundLedger" = None
    f_star: tuple = ()  # full-rank isometries used by the reflection family
    exact: bool = True

    def __post_init__(self):
        if len(self.gammas) != self.n:
            raise WallError(f"need {self.n} pairing classes, got {len(self.gammas)}")
        for g in self.gammas:
            if len(g) != self.lattice.rank:
                raise WallError("pairing class length does not match lattice rank")
        self._cache = {}
        self._probe_continuity()

    def sigma_at(self, t):
        t = tuple(t)
        if t not in self._cache:
            val = tuple(self.sigma(t))
            if len(val) != self.lattice.rank:
                raise WallError(
                    f"sigma(t) has length {len(val)}, lattice rank {self.lattice.rank}"
                )
            self._cache[t] = val
        return self._cache[t]

    def _probe_continuity(self):
        """Sampled sanity: sigma is finite everywhere and its increments
        shrink with the step (a Lipschitz-style probe, not a proof)."""
        if self.n == 0:
            return
        for mesh in (4,):
            pts = itertools.product(
                *[[Fraction(j, mesh) for j in range(mesh + 1)]] * self.n
            )
            for t in pts:
                val = self.sigma_at(t)
                for x in val:
                    if isinstance(x, float) and not math.isfinite(x):
                        raise WallError(f"sigma({t}) is not finite")


def psi(fam: WallFamily, t):
    """The pairing vector Psi_i(t) = sigma(t)^T G gamma_i, exact when sigma is."""
    val = fam.sigma_at(t)
    gram = fam.lattice.gram
    out = []
    for g in fam.gammas:
        gg = gram @ np.asarray(g, dtype=np.int64)
        out.append(sum(Fraction(v) * int(c) for v, c in zip(val, gg)))
    return out


def f_rs(t):
    """Shrink-then-reparametrize: coordinatewise min(2 t_i, 1).

    Collapses [1/2, 1] to the far face and rescales [0, 1/2] over the whole
    interval; continuous, and idempotent on the faces.
    """
    return tuple(min(2 * ti, ti * 0 + 1) for ti in t)


def reflect(t, i):
    """Flip the i-th coordinate between the 0-face and the 1-face."""
    t = list(t)
    t[i] = 1 - t[i]
    return tuple(t)


# ---------------------------------------------------------------------------
# PL mapping degree


@dataclass
class DegreeResult:
    value: int
    trace: tuple  # ((mesh, degree), ...)
    exact: bool
    method: str = "pl-ray"
    certificates: tuple = ()

    def to_json(self):
        return {
            "value": self.value,
            "trace": [list(x) for x in self.trace],
            "exact": self.exact,
            "method": self.method,
            "certificates": [c.to_json() for c in self.certificates],
        }


def _face_orientation(axis: int, side: int) -> int:
    """Outward-normal-first convention for the boundary of [0,1]^n."""
    return (1 if side == 1 else -1) * (-1) ** axis


def _simplices_of_face(n, axis, side, mesh):
    """Kuhn-triangulated little cubes of one face, with orientation signs.

    Yields (vertices, sign) where vertices is a tuple of n points of [0,1]^n
    (Fraction coordinates) spanning an (n-1)-simplex.
    """
    other = [a for a in range(n) if a != axis]
    h = Fraction(1, mesh)
    for corner in itertools.product(range(mesh), repeat=len(other)):
        base = [Fraction(0)] * n
        base[axis] = Fraction(side)
        for slot, a in enumerate(other):
            base[a] = Fraction(corner[slot], mesh)
        for perm in itertools.permutations(range(len(other))):
            sign = _perm_sign(perm)
            verts = [tuple(base)]
            cur = list(base)
            for step in perm:
                cur[other[step]] += h
                verts.append(tuple(cur))
            yield tuple(verts), sign * _face_orientation(axis, side)


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _draw_ray(n, rng):
    return [
        Fraction(int(rng.integers(10**5, 10**6)) * (1 if rng.integers(2) else -1), 10**6)
        for _ in range(n)
    ]


def _pl_degree_at_mesh(fam, mesh, ray):
    n = fam.n
    total = 0
    for axis in range(n):
        for side in (0, 1):
            for verts, orient in _simplices_of_face(n, axis, side, mesh):
                cols = [psi(fam, v) for v in verts]
                for w in cols:
                    if all(x == 0 for x in w):
                        raise WallError(
                            "section meets wall on boundary at a sampled vertex"
                        )
                w = [[Fraction(cols[j][i]) for j in range(n)] for i in range(n)]
                d = _exact.det(w)
                if d == 0:
                    stacked = [row[:] + [ray[i]] for i, row in enumerate(w)]
                    if _exact.rank(stacked) == _exact.rank(w):
                        raise _RayDegenerate
                    continue
                lam = _exact.solve(w, ray)
                if any(x == 0 for x in lam):
                    raise _RayDegenerate
                if all(x > 0 for x in lam):
                    total += orient * (1 if d > 0 else -1)
    return total


def boundary_degree(
    fam: WallFamily,
    seed: int = 0,
    base_mesh: int = 2,
    min_doublings: int = 1,
    max_doublings: int = 5,
) -> DegreeResult:
    """PL mapping degree of Psi . sigma on ([0,1]^n, boundary).

    Triangulates the boundary, linearizes per simplex, and counts oriented
    simplices whose image cone contains a seeded generic rational ray.
    Refinement doubles until ``min_doublings + 1`` consecutive levels agree.
    Ledger-mode families must clear their face certificates first and also
    get the certified face-sign degree cross-checked.
    """
    if fam.ledger is not None:
        certs = _all_certificates(fam)
        pl = _refine_degree(fam, seed, base_mesh, min_doublings, max_doublings)
        signed = face_sign_degree(fam)
        if pl.value != signed.value:
            raise WallError(
                f"PL degree {pl.value} disagrees with certified face-sign "
                f"degree {signed.value}"
            )
        return DegreeResult(
            value=pl.value,
            trace=pl.trace,
            exact=pl.exact,
            method="pl-ray+ledger",
            certificates=certs,
        )
    return _refine_degree(fam, seed, base_mesh, min_doublings, max_doublings)


def _refine_degree(fam, seed, base_mesh, min_doublings, max_doublings):
    rng = np.random.default_rng(seed)
    values = []
    trace = []
    mesh = base_mesh
    for _ in range(max_doublings + 1):
        deg = None
        for _attempt in range(MAX_RAY_REDRAWS):
            ray = _draw_ray(fam.n, rng)
            try:
                deg = _pl_degree_at_mesh(fam, mesh, ray)
                break
            except _RayDegenerate:
                continue
        if deg is None:
            raise StabilityError("no generic ray found; geometry is degenerate")
        values.append(deg)
        trace.append((mesh, deg))
        if len(values) >= min_doublings + 1 and len(
            set(values[-(min_doublings + 1) :])
        ) == 1:
            return DegreeResult(value=deg, trace=tuple(trace), exact=fam.exact)
        mesh *= 2
    raise StabilityError(f"degree did not stabilize (trace {trace})")


# ---------------------------------------------------------------------------
# bound ledger


@dataclass(frozen=True)
class BoundLedger:
    """Named analytic constants, neck lengths, and exact baseline pairings.

    ``constants`` must include C1 (right-inverse threshold), C17 and C18 (the
    per-face interaction budgets); other roles (C2, C3, eps1) ride along as
    documentation.  Invariants: 4T >= 3(T_i + T_j) for i != j, and T_i > C1.
    """

    constants: dict
    T: Fraction
    T_list: tuple
    baselines: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "constants", {k: Fraction(v) for k, v in self.constants.items()}
        )
        object.__setattr__(self, "T", Fraction(self.T))
        object.__setattr__(self, "T_list", tuple(Fraction(t) for t in self.T_list))
        object.__setattr__(
            self, "baselines", tuple(Fraction(b) for b in self.baselines)
        )
        for name in ("C1", "C17", "C18"):
            if name not in self.constants:
                raise WallError(f"ledger must provide constant {name}")
        if any(c <= 0 for c in self.constants.values()):
            raise WallError("ledger constants must be positive")
        c1 = self.constants["C1"]
        for i, ti in enumerate(self.T_list):
            if ti <= c1:
                raise WallError(f"neck length T_{i+1} = {ti} must exceed C1 = {c1}")
        for i, ti in enumerate(self.T_list):
            for j, tj in enumerate(self.T_list):
                if i < j and 4 * self.T < 3 * (ti + tj):
                    raise WallError(
                        f"ledger invariant 4T >= 3(T_{i+1}+T_{j+1}) violated"
                    )

    @property
    def min_T(self) -> Fraction:
        return min(self.T_list)


@dataclass(frozen=True)
class FaceCertificate:
    axis: int
    side: int
    interval: tuple  # (lo, hi) Fractions
    certified: bool
    min_T_required: Fraction       # this face alone
    min_T_required_both: Fraction  # both faces of this coordinate

    def to_json(self):
        return {
            "axis": self.axis,
            "side": self.side,
            "interval": [str(self.interval[0]), str(self.interval[1])],
            "certified": self.certified,
            "min_T_required": str(self.min_T_required),
            "min_T_required_both": str(self.min_T_required_both),
        }


def ledger_certificate(ledger: BoundLedger, face: int, i: int) -> FaceCertificate:
    """Signed interval for the i-th pairing on face t_i = face (0 or 1).

    The interval is baseline +- C/min(T); the certificate holds when it
    excludes zero.  Also reports the minimal neck length that would certify
    this face, and the one certifying both faces of the coordinate (the
    two faces carry different interaction budgets C17 and C18).
    """
    if face not in (0, 1):
        raise WallError("face must be 0 or 1")
    if not 0 <= i < len(ledger.baselines):
        raise WallError(f"no baseline for coordinate {i}")
    const = ledger.constants["C17" if face == 0 else "C18"]
    base = ledger.baselines[i] if face == 0 else -ledger.baselines[i]
    radius = const / ledger.min_T
    lo, hi = base - radius, base + radius
    certified = lo > 0 or hi < 0
    if base == 0:
        needed = both = Fraction(0)
    else:
        needed = const / abs(base)
        both = max(ledger.constants["C17"], ledger.constants["C18"]) / abs(base)
    return FaceCertificate(
        axis=i, side=face, interval=(lo, hi), certified=certified,
        min_T_required=needed, min_T_required_both=both,
    )


def _all_certificates(fam: WallFamily):
    certs = []
    for i in range(fam.n):
        for face in (0, 1):
            c = ledger_certificate(fam.ledger, face, i)
            if not c.certified:
                raise WallError(
                    f"increase T: face t_{i+1}={face} interval "
                    f"[{c.interval[0]}, {c.interval[1]}] straddles 0 "
                    f"(need min T > {c.min_T_required})"
                )
            certs.append(c)
    return tuple(certs)


def face_sign_degree(fam: WallFamily) -> DegreeResult:
    """Degree from strict opposite face signs alone.

    When every pairing Psi_i is strictly one sign on face t_i = 0 and the
    other on t_i = 1, the boundary map is homotopic to a product of interval
    reflections and the degree is the product of the per-coordinate sign
    drops.  Signs are evaluated exactly at face centers and certified by the
    ledger when present.
    """
    value = 1
    for i in range(fam.n):
        center = [Fraction(1, 2)] * fam.n
        center[i] = Fraction(0)
        lo = psi(fam, tuple(center))[i]
        center[i] = Fraction(1)
        hi = psi(fam, tuple(center))[i]
        if lo == 0 or hi == 0 or (lo > 0) == (hi > 0):
            raise WallError(
                f"face signs for coordinate {i+1} are not strictly opposite"
            )
        value *= ((hi > 0) - (hi < 0) - ((lo > 0) - (lo < 0))) // 2
    return DegreeResult(value=value, trace=(), exact=True, method="face-signs")


# ---------------------------------------------------------------------------
# reflection family


def _h_block_lattice(n):
    return build_lattice([{"type": "H", "count": n}])


def _embed_block(vec, i, n):
    out = [Fraction(0)] * (2 * n)
    out[2 * i] = Fraction(vec[0])
    out[2 * i + 1] = Fraction(vec[1])
    return out


MINUS_IDENTITY = ((-1, 0), (0, -1))
SWAP_NEGATE = ((0, -1), (-1, 0))


def reflection_family(
    n: int,
    lattice: IntegerLattice = None,
    gammas=None,
    f_star=None,
    localization="exact-limit",
    wiggle=Fraction(1, 2),
) -> WallFamily:
    """The per-coordinate reflection section over [0,1]^n.

    Defaults: the rank-2n hyperbolic lattice, gamma_i = e_{2i} + e_{2i+1},
    and f_i = -identity on the i-th block.  Each f_i must be an isometry of
    its block with f_i gamma_i = -gamma_i.  The section runs, per coordinate:
    a positive-square class path eta_i on [0, 1/2], then the straight segment
    from eta_i(1) to f_i(eta_i(0)) on [1/2, 1]; since f_i reverses the
    positive cone, the i-th pairing crosses zero exactly once.

    ``localization`` is "exact-limit" (classes replace localized forms) or a
    BoundLedger, in which case all 2n face certificates must clear zero and
    the family carries the ledger for degree-time checks.
    """
    if n < 1:
        raise WallError("n must be at least 1")
    lat = lattice if lattice is not None else _h_block_lattice(n)
    if lat.rank != 2 * n:
        raise WallError("reflection family needs a rank-2n lattice")
    if gammas is None:
        gammas = [
            tuple(1 if j in (2 * i, 2 * i + 1) else 0 for j in range(2 * n))
            for i in range(n)
        ]
    if f_star is None:
        f_star = [MINUS_IDENTITY] * n
    if len(f_star) != n:
        raise WallError(f"need {n} reflection maps, got {len(f_star)}")

    blocks = []
    fulls = []
    for i, fs in enumerate(f_star):
        fs = np.asarray(fs, dtype=np.int64)
        if fs.shape != (2, 2):
            raise WallError(f"f_star[{i}] must be a 2x2 block")
        full = np.eye(2 * n, dtype=np.int64)
        full[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = fs
        if not is_isometry(lat, full):
            raise WallError(f"f_star[{i}] is not an isometry of its block")
        gi = np.asarray(gammas[i], dtype=np.int64)
        if not np.array_equal(full @ gi, -gi):
            raise WallError(
                f"f_star[{i}] does not send gamma_{i+1} to -gamma_{i+1}"
            )
        blocks.append(fs)
        fulls.append(full)

    wiggle = Fraction(wiggle)
    if not 0 <= wiggle < 1:
        raise WallError("wiggle must sit in [0, 1)")

    def eta(i, u):
        g = (Fraction(gammas[i][2 * i]), Fraction(gammas[i][2 * i + 1]))
        bump = u * (1 - u) * wiggle
        return (g[0] + bump, g[1] - bump)

    def f_apply(i, vec2):
        fs = blocks[i]
        return (
            Fraction(int(fs[0, 0])) * vec2[0] + Fraction(int(fs[0, 1])) * vec2[1],
            Fraction(int(fs[1, 0])) * vec2[0] + Fraction(int(fs[1, 1])) * vec2[1],
        )

    def sigma(t):
        out = [Fraction(0)] * (2 * n)
        for i, ti in enumerate(t):
            ti = Fraction(ti)
            if ti <= Fraction(1, 2):
                block = eta(i, 2 * ti)
            else:
                a = 2 - 2 * ti
                b = 2 * ti - 1
                e1 = eta(i, Fraction(1))
                fe0 = f_apply(i, eta(i, Fraction(0)))
                block = (a * e1[0] + b * fe0[0], a * e1[1] + b * fe0[1])
            emb = _embed_block(block, i, n)
            out = [x + y for x, y in zip(out, emb)]
        return out

    ledger = None
    if localization != "exact-limit":
        if not isinstance(localization, BoundLedger):
            raise WallError(
                "localization must be 'exact-limit' or a BoundLedger"
            )
        ledger = localization
        if len(ledger.baselines) != n:
            raise WallError(f"ledger needs {n} baseline pairings")

    fam = WallFamily(
        n=n,
        lattice=lat,
        gammas=tuple(tuple(int(x) for x in g) for g in gammas),
        sigma=sigma,
        name=f"reflection-{n}",
        ledger=ledger,
        f_star=tuple(tuple(map(tuple, f)) for f in fulls),
    )
    if ledger is not None:
        _all_certificates(fam)
    return fam


def reflection_consistency_check(fam: WallFamily, samples: int = 5) -> bool:
    """Verify f_i sigma(t) = sigma(reflect_i t) on sampled 0-face points.

    This is the bookkeeping identity that lets the cube section descend to
    the torus; it holds exactly for reflection families.
    """
    if not fam.f_star:
        raise WallError("family carries no reflection maps")
    grid = [Fraction(j, samples - 1) for j in range(samples)]
    for i in range(fam.n):
        full = np.array(fam.f_star[i], dtype=np.int64)
        for t in itertools.product(grid, repeat=fam.n):
            t = list(t)
            t[i] = Fraction(0)
            t = tuple(t)
            lhs = [
                sum(Fraction(int(full[r, c])) * Fraction(v) for c, v in enumerate(fam.sigma_at(t)))
                for r in range(fam.lattice.rank)
            ]
            rhs = [Fraction(v) for v in fam.sigma_at(reflect(t, i))]
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# composition parity


@dataclass(frozen=True)
class CompositionTable:
    """Per-signature invariant values for composed commuting diffeomorphisms.

    ``values[k]`` is the count for any factor choice with k of the n slots
    using the 0-side diffeomorphism (symmetry makes the count depend only on
    k); the full invariant of the compositions expands as the binomial-
    weighted sum over k.
    """

    n: int
    values: dict

    def __post_init__(self):
        object.__setattr__(
            self, "values", {int(k): int(v) for k, v in self.values.items()}
        )
        missing = [k for k in range(self.n + 1) if k not in self.values]
        if missing:
            raise WallError(f"composition table incomplete: missing k = {missing}")

    @classmethod
    def from_endpoints(cls, n, zero_side_value, one_side_value, middles=None):
        """Table with values[n] = zero_side_value (all slots on side 0),
        values[0] = one_side_value, and given or zero middle values."""
        values = {k: 0 for k in range(n + 1)}
        values.update(middles or {})
        values[n] = zero_side_value
        values[0] = one_side_value
        return cls(n=n, values=values)


@dataclass(frozen=True)
class GluingCount:
    value: int
    theorem_dependent: bool = True

    def to_json(self):
        return {"value": self.value, "theorem_dependent": self.theorem_dependent}


def binom_parity(n: int, k: int) -> str:
    """'odd' or 'even' for C(n, k), by the binary-digit (Lucas) criterion."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got ({n}, {k})")
    return "odd" if (n & k) == k else "even"


def composition_sum(table: CompositionTable):
    """Sum of the 2^n composed-factor invariants, mod 2.

    Equals sum_k C(n,k) values[k]; returns (parity, contributing k's), the
    contributors being exactly the k with odd binomial coefficient.
    """
    n = table.n
    total = 0
    contributing = []
    for k in range(n + 1):
        if binom_parity(n, k) == "odd":
            total += table.values[k]
            contributing.append(k)
    return total % 2, tuple(contributing)


def gluing_count(wall_degree: int, base_sw: int) -> GluingCount:
    """Parameterized count from the gluing formula: wall degree times the
    base invariant, mod 2.  Theorem-given, so flagged in every report."""
    return GluingCount(value=(wall_degree * base_sw) % 2)
