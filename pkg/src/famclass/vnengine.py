"""Finite-dimensional section counting over cell-complex bases.

A toy family is a section s_b(x) of target dimension m over a fiber R^d,
parameterized on a point, a cube, or a torus (the torus given by a cube with
invertible fiber/target transitions on opposite faces).  Counting works by a
regular-shift reading of the relative Euler class: perturb by a finite-rank
bump-supported linear map, shift the perturbation coordinates by a small
generic vector, and count the (now transverse) zeros with Jacobian signs, on
a refining grid with Newton polish.  Counts per top-relevant base cell
assemble into a cellular cochain; parity counts are the default whenever the
torus transitions do not preserve orientation.

All randomness is seeded; two calls with one seed are bit-identical.
"""

from __future__ import annotations

import ast
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .cochain import (
    CellComplex,
    build_cube,
    build_point,
    build_torus,
    class_from_cell_counts,
)
from .errors import (
    CocycleError,
    FamClassError,
    PropernessError,
    StabilityError,
    TransversalityError,
)

__all__ = [
    "VNEngineError",
    "PropernessError",
    "TransversalityError",
    "StabilityError",
    "CocycleError",
    "Charge",
    "FinDimPerturbation",
    "ToyFredholmFamily",
    "CountResult",
    "build_perturbation",
    "random_perturbation",
    "suspend",
    "count_point",
    "family_class",
    "assemble_twisted_family",
    "check_perturbation_independence",
    "check_cobordism_invariance",
    "winding_number",
    "pullback_circle_family",
    "builtin_family",
    "compile_polynomial",
    "family_from_polynomials",
    "family_from_spec",
    "BUILTIN_FAMILIES",
]

NEWTON_TOL = 1e-12
TRANSVERSALITY_TOL = 1e-8
MAX_SHIFT_REDRAWS = 8


VNEngineError = FamClassError


def _bump(r2):
    """C^1 cutoff (1 - r^2)^2 on r < 1, in terms of r^2."""
    out = np.where(r2 < 1.0, (1.0 - r2) ** 2, 0.0)
    return out


@dataclass(frozen=True)
class Charge:
    """One finite-rank perturbation summand: a linear map through a bump."""

    center: tuple  # fiber center
    radius: float  # fiber cutoff radius
    linmap: tuple  # m x N_i matrix, as nested tuples
    base_center: tuple = ()
    base_radius: float = 1.0

    @property
    def n_dirs(self) -> int:
        return len(self.linmap[0]) if self.linmap else 0

    def matrix(self) -> np.ndarray:
        return np.asarray(self.linmap, dtype=float)


class FinDimPerturbation:
    """Sum of bump-cutoff linear maps; evaluates phi(b, x, a)."""

    def __init__(self, charges):
        self.charges = list(charges)

    @property
    def total_dim(self) -> int:
        return sum(c.n_dirs for c in self.charges)

    def operator_bound(self) -> float:
        return sum(np.linalg.norm(c.matrix(), 2) for c in self.charges) or 0.0

    def split(self, a):
        out = []
        pos = 0
        for c in self.charges:
            out.append(np.asarray(a[pos : pos + c.n_dirs], dtype=float))
            pos += c.n_dirs
        return out

    def __call__(self, b, x, a):
        """phi at base points b (...,k), fiber points x (...,d), shift a (N,)."""
        x = np.asarray(x, dtype=float)
        b = np.asarray(b, dtype=float)
        out = None
        for charge, a_i in zip(self.charges, self.split(a)):
            img = charge.matrix() @ a_i  # (m,)
            r2 = np.sum((x - np.asarray(charge.center)) ** 2, axis=-1) / charge.radius**2
            rho = _bump(r2)
            if charge.base_center and b.shape[-1]:
                rb2 = (
                    np.sum((b - np.asarray(charge.base_center)) ** 2, axis=-1)
                    / charge.base_radius**2
                )
                rho = rho * _bump(rb2)
            term = rho[..., None] * img
            out = term if out is None else out + term
        if out is None:
            return np.zeros(x.shape[:-1] + (0,))
        return out


def _sphere_samples(d, radius, n=None):
    if d == 1:
        return np.array([[-radius], [radius]])
    if d == 2:
        n = n or 128
        th = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        return radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    n = n or 512
    rng = np.random.default_rng(12345)  # fixed: these are deterministic probes
    pts = rng.standard_normal((n, d))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return radius * pts


class ToyFredholmFamily:
    """A parameterized section with a properness certificate.

    ``evaluator(b, x)`` must broadcast: b of shape (..., k) with k the base
    dimension (k = 0 for a point base), x of shape (..., d), output (..., m).
    The index d - m is constant by construction.  ``transitions`` holds the
    face monodromy for torus bases: axis -> (fiber map A, target map B) with
    the compatibility s(b|_{t_i=0}, A x) = B s(b|_{t_i=1}, x).
    """

    def __init__(
        self,
        base: CellComplex,
        fiber_dim: int,
        target_dim: int,
        evaluator,
        properness_radius: float,
        transitions=None,
        name: str = "",
    ):
        self.base = base
        self.fiber_dim = int(fiber_dim)
        self.target_dim = int(target_dim)
        self.evaluator = evaluator
        self.properness_radius = float(properness_radius)
        self.transitions = transitions or {}
        self.name = name
        self._check_properness()

    @property
    def index(self) -> int:
        return self.fiber_dim - self.target_dim

    @property
    def base_dim(self) -> int:
        return self.base.dim

    @property
    def orientation_consistent(self) -> bool:
        """Whether integer counts descend through the face transitions."""
        for a, bmat in self.transitions.values():
            if np.linalg.det(a) * np.linalg.det(bmat) <= 0:
                return False
        return True

    def _base_probe_points(self, per_axis=5):
        k = self.base_dim
        if k == 0:
            return np.zeros((1, 0))
        axes = [np.linspace(0.0, 1.0, per_axis) for _ in range(k)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return mesh.reshape(-1, k)

    def boundary_floor(self) -> float:
        """min |s| over sampled (base, fiber sphere of radius R) points."""
        sphere = _sphere_samples(self.fiber_dim, self.properness_radius)
        bases = self._base_probe_points()
        b = np.repeat(bases, len(sphere), axis=0)
        x = np.tile(sphere, (len(bases), 1))
        vals = self.evaluator(b, x)
        return float(np.min(np.linalg.norm(vals, axis=-1)))

    def _check_properness(self):
        if self.fiber_dim == 0:
            return
        floor = self.boundary_floor()
        if floor <= 1e-12:
            raise PropernessError(
                f"family {self.name!r}: section vanishes on the radius-"
                f"{self.properness_radius} fiber sphere (|s| floor {floor:.2e})"
            )

    def total_map(self, shift_phi=None, shift=None):
        """F(b, x) = s(b, x) [+ phi(b, x, shift)] as one broadcast callable."""
        if shift_phi is None or shift is None or shift_phi.total_dim == 0:
            return self.evaluator
        def f(b, x):
            return self.evaluator(b, x) + shift_phi(b, x, shift)
        return f


@dataclass
class CountResult:
    """A stabilized signed or parity count with its refinement trace."""

    value: int
    ring: str
    trace: tuple  # ((grid_size, raw_count), ...)
    zeros: tuple  # ((point coords), sign)

    def to_json(self):
        return {
            "value": self.value,
            "ring": self.ring,
            "trace": [list(t) for t in self.trace],
            "zeros": [{"point": list(p), "sign": s} for p, s in self.zeros],
        }


# ---------------------------------------------------------------------------
# zero finding


def _eval_on_mesh(f, lows, highs, n_per_axis):
    dim = len(lows)
    axes = [np.linspace(lows[i], highs[i], n_per_axis + 1) for i in range(dim)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = f(mesh.reshape(-1, dim)).reshape(mesh.shape[:-1] + (-1,))
    return mesh, vals


def _candidate_cells(vals):
    """Flag grid cells whose corner values allow a zero: per component the
    corner min is <= 0 <= corner max."""
    dim = vals.ndim - 1
    mins = vals
    maxs = vals
    for ax in range(dim):
        lo = [slice(None)] * (dim + 1)
        hi = [slice(None)] * (dim + 1)
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        mins = np.minimum(mins[tuple(lo)], mins[tuple(hi)])
        maxs = np.maximum(maxs[tuple(lo)], maxs[tuple(hi)])
    flags = np.all((mins <= 0) & (maxs >= 0), axis=-1)
    return flags


def _small_value_cells(vals, h):
    """Flag cells whose center-ish corner value is small relative to a
    first-difference Lipschitz estimate; catches tangential (degenerate)
    zeros that never change sign."""
    dim = vals.ndim - 1
    norms = np.linalg.norm(vals, axis=-1)
    lip = 0.0
    for ax in range(dim):
        lo = [slice(None)] * dim
        hi = [slice(None)] * dim
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        d = np.abs(norms[tuple(hi)] - norms[tuple(lo)])
        lip = max(lip, float(d.max()) / h if d.size else 0.0)
    corner = norms
    for ax in range(dim):
        lo = [slice(None)] * dim
        lo[ax] = slice(0, -1)
        corner = corner[tuple(lo)]
    thresh = max(lip * h * math.sqrt(dim) * 1.5, 1e-9)
    return corner <= thresh


def _jacobian(f, p, step):
    dim = p.size
    pts = np.repeat(p[None], 2 * dim, axis=0)
    for i in range(dim):
        pts[2 * i, i] += step
        pts[2 * i + 1, i] -= step
    vals = f(pts)
    cols = [(vals[2 * i] - vals[2 * i + 1]) / (2 * step) for i in range(dim)]
    return np.stack(cols, axis=-1)


def _newton(f, p0, lows, highs, tol=NEWTON_TOL, max_iter=60):
    p = np.asarray(p0, dtype=float).copy()
    span = float(np.max(np.asarray(highs) - np.asarray(lows))) or 1.0
    for _ in range(max_iter):
        val = f(p[None])[0]
        if np.linalg.norm(val) < tol:
            return p
        jac = _jacobian(f, p, 1e-6 * max(1.0, float(np.max(np.abs(p)))))
        try:
            dx = np.linalg.solve(jac, -val)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(jac, -val, rcond=None)[0]
        nrm = np.linalg.norm(dx)
        if not np.isfinite(nrm):
            return None
        if nrm > 0.5 * span:
            dx *= 0.5 * span / nrm
        p = p + dx
        if np.any(p < np.asarray(lows) - 0.5 * span) or np.any(
            p > np.asarray(highs) + 0.5 * span
        ):
            return None
    val = f(p[None])[0]
    return p if np.linalg.norm(val) < tol else None


def _seed_cells(vals, h):
    """Newton seeds: every sign-change cell, plus one minimum-|F| cell per
    connected component of the small-value capture region.

    Sign changes find each transverse zero once the grid resolves it; the
    per-component minima catch tangential zeros without flooding Newton with
    every cell of a low-|F| blob.
    """
    sign_cells = _candidate_cells(vals)
    small = _small_value_cells(vals, h)
    seeds = np.argwhere(sign_cells)
    labels, count = ndimage.label(small)
    if count:
        norms = np.linalg.norm(vals, axis=-1)
        corner = norms
        for ax in range(vals.ndim - 1):
            lo = [slice(None)] * (vals.ndim - 1)
            lo[ax] = slice(0, -1)
            corner = corner[tuple(lo)]
        mins = ndimage.minimum_position(
            corner, labels, index=range(1, count + 1)
        )
        seeds = np.vstack([seeds, np.atleast_2d(np.asarray(mins, dtype=int))])
    return seeds


def _find_zeros_at_level(f, lows, highs, n_per_axis):
    dim = len(lows)
    mesh, vals = _eval_on_mesh(f, lows, highs, n_per_axis)
    h = max(
        (highs[i] - lows[i]) / n_per_axis for i in range(dim)
    )
    zeros = []
    eps = 1e-7 * max(1.0, max(abs(v) for v in (*lows, *highs)))
    for cell in _seed_cells(vals, h):
        center = np.array(
            [
                lows[i] + (cell[i] + 0.5) * (highs[i] - lows[i]) / n_per_axis
                for i in range(dim)
            ]
        )
        z = _newton(f, center, lows, highs)
        if z is None:
            continue
        if np.any(z < np.asarray(lows) - 1e-9) or np.any(z > np.asarray(highs) + 1e-9):
            continue
        if all(np.linalg.norm(z - w) > eps * 10 for w in zeros):
            zeros.append(z)
    zeros.sort(key=lambda z: tuple(z))
    return zeros, h


def _signed_zeros(f, zeros, h):
    """Attach Jacobian signs; raises TransversalityError on a flat zero.

    The tolerance is |det J| > tol * max(1, product of row norms): relative
    for steep sections, an absolute floor for flat ones (a bare row-norm
    normalization is vacuous in one dimension).
    """
    out = []
    for z in zeros:
        jac = _jacobian(f, z, max(h / 100.0, 1e-7))
        detj = float(np.linalg.det(jac))
        scale = max(1.0, float(np.prod(np.linalg.norm(jac, axis=1))))
        if abs(detj) / scale < TRANSVERSALITY_TOL:
            raise TransversalityError(
                f"zero at {np.round(z, 6).tolist()} has |det J|/scale "
                f"{abs(detj)/scale:.2e} below tolerance"
            )
        out.append((tuple(float(v) for v in z), 1 if detj > 0 else -1))
    return out


def _stable_count(f, lows, highs, ring, base_grid=None, max_levels=None):
    """Count zeros on a box, refining the grid until two levels agree."""
    dim = len(lows)
    if base_grid is None:
        base_grid = 16 if dim <= 2 else (8 if dim <= 4 else 4)
    if max_levels is None:
        max_levels = 5 if dim <= 4 else 2
    trace = []
    prev = None
    for level in range(max_levels):
        n = base_grid * (2**level)
        zeros, h = _find_zeros_at_level(f, lows, highs, n)
        signed = _signed_zeros(f, zeros, h)
        value = (
            sum(s for _, s in signed)
            if ring == "Z"
            else len(signed) % 2
        )
        trace.append((n, len(signed)))
        if prev is not None and prev[0] == len(signed) and prev[1] == value:
            return CountResult(
                value=value, ring=ring, trace=tuple(trace), zeros=tuple(signed)
            )
        prev = (len(signed), value)
    raise StabilityError(
        f"zero count failed to stabilize across refinements (trace {trace})"
    )


# ---------------------------------------------------------------------------
# perturbation construction


def _detect_raw_zeros(fam: ToyFredholmFamily, cell=None):
    """Approximate zeros of the unperturbed total map over a base cell."""
    lows, highs, embed = _cell_domain(fam, cell)
    f = _embedded_map(fam.evaluator, embed, fam.fiber_dim)
    dim = len(lows)
    n = 16 if dim <= 2 else (8 if dim <= 4 else 4)
    mesh, vals = _eval_on_mesh(f, lows, highs, n)
    h = max((highs[i] - lows[i]) / n for i in range(dim))
    pts = []
    for cellidx in _seed_cells(vals, h):
        center = np.array(
            [
                lows[i] + (cellidx[i] + 0.5) * (highs[i] - lows[i]) / n
                for i in range(dim)
            ]
        )
        z = _newton(f, center, lows, highs, tol=1e-10, max_iter=80)
        if z is None:
            continue
        # cluster radius wide enough to merge Newton's copies of one
        # degenerate zero (polish accuracy ~ sqrt(tol) there)
        if all(np.linalg.norm(z - w) > 1e-4 * max(1.0, fam.properness_radius) for w in pts):
            pts.append(z)
    return pts, f


def build_perturbation(fam: ToyFredholmFamily, seed: int = 0) -> FinDimPerturbation:
    """Charges making d(s) + phi surjective at every detected zero.

    Zeros where ds is already surjective contribute nothing; each deficient
    zero gets one identity-map charge supported on a bump around it.  The
    construction is deterministic given the seed (the seed only matters for
    randomized variants; see random_perturbation).
    """
    del seed  # deterministic construction; signature kept uniform
    r = fam.properness_radius
    # rank cutoff relative to the section's boundary scale: a degenerate
    # zero polished to |s| < 1e-10 sits within ~1e-5 of the true zero, so
    # its fiber-derivative singular values land well below this line
    sv_cutoff = 1e-3 * max(fam.boundary_floor() / r, 1e-3)
    charges = []
    for cell in _counting_cells(fam):
        zeros, f = _detect_raw_zeros(fam, cell)
        k_free = len(cell.free_axes) if cell is not None else 0
        for z in zeros:
            x = z[k_free:]
            if np.linalg.norm(x) > r - 1e-6:
                raise PropernessError(
                    f"properness violated: zero at |x| = {np.linalg.norm(x):.6f} "
                    f"touches the radius-{r} boundary"
                )
            jac = _jacobian(f, z, 1e-6)[:, k_free:]  # fiber-direction block
            sv = np.linalg.svd(jac, compute_uv=False) if jac.size else np.array([])
            rank = int(np.sum(sv > sv_cutoff)) if sv.size else 0
            if rank >= fam.target_dim:
                continue
            charges.append(
                Charge(
                    center=tuple(float(v) for v in x),
                    radius=min(r / 2.0, max(0.5, r / 4.0)),
                    linmap=tuple(
                        tuple(1.0 if i == j else 0.0 for j in range(fam.target_dim))
                        for i in range(fam.target_dim)
                    ),
                    base_center=tuple(float(v) for v in z[:k_free])
                    if k_free
                    else (),
                    base_radius=0.75,
                )
            )
    phi = FinDimPerturbation(charges)
    _assert_surjective_with(fam, phi)
    return phi


def random_perturbation(
    fam: ToyFredholmFamily, seed: int, extra_dirs: int = 0
) -> FinDimPerturbation:
    """A valid perturbation with jittered centers and random full-rank maps.

    Used by the well-definedness checks: different seeds give genuinely
    different charges, and counts must not care.
    """
    rng = np.random.default_rng(seed)
    r = fam.properness_radius
    m = fam.target_dim
    charges = []
    for cell in _counting_cells(fam):
        zeros, _ = _detect_raw_zeros(fam, cell)
        k_free = len(cell.free_axes) if cell is not None else 0
        for z in zeros:
            x = np.asarray(z[k_free:])
            jitter = rng.uniform(-0.05, 0.05, size=x.shape) * r
            lin = rng.standard_normal((m, m + extra_dirs))
            while np.linalg.matrix_rank(lin) < m:
                lin = rng.standard_normal((m, m + extra_dirs))
            charges.append(
                Charge(
                    center=tuple(float(v) for v in (x + jitter)),
                    radius=float(rng.uniform(0.4, 0.7)) * r,
                    linmap=tuple(tuple(float(v) for v in row) for row in lin),
                    base_center=tuple(float(v) for v in z[:k_free])
                    if k_free
                    else (),
                    base_radius=float(rng.uniform(0.6, 0.9)),
                )
            )
    phi = FinDimPerturbation(charges)
    _assert_surjective_with(fam, phi)
    return phi


def _assert_surjective_with(fam: ToyFredholmFamily, phi: FinDimPerturbation):
    """Sampled surjectivity of ds + sum rho_i f_i at the detected zeros."""
    for cell in _counting_cells(fam):
        zeros, f = _detect_raw_zeros(fam, cell)
        k_free = len(cell.free_axes) if cell is not None else 0
        for z in zeros:
            jac = _jacobian(f, z, 1e-6)[:, k_free:]
            blocks = [jac] if jac.size else []
            b_full, x = _split_full(fam, cell, z, k_free)
            for charge in phi.charges:
                r2 = float(
                    np.sum((x - np.asarray(charge.center)) ** 2) / charge.radius**2
                )
                rho = float(_bump(np.array(r2)))
                if charge.base_center and b_full.size:
                    rb2 = float(
                        np.sum((b_full - np.asarray(charge.base_center)) ** 2)
                        / charge.base_radius**2
                    )
                    rho *= float(_bump(np.array(rb2)))
                if rho > 0:
                    blocks.append(rho * charge.matrix())
            total = np.concatenate(blocks, axis=1) if blocks else np.zeros((fam.target_dim, 0))
            if np.linalg.matrix_rank(total, tol=1e-9) < fam.target_dim:
                raise VNEngineError(
                    f"perturbation fails surjectivity at zero {np.round(z,6).tolist()}"
                )


def suspend(phi: FinDimPerturbation, extra: int) -> FinDimPerturbation:
    """Append unused perturbation directions (zero linear maps)."""
    if extra <= 0:
        return phi
    if phi.charges:
        m = len(phi.charges[0].linmap)
        pad = Charge(
            center=phi.charges[0].center,
            radius=phi.charges[0].radius,
            linmap=tuple(tuple(0.0 for _ in range(extra)) for _ in range(m)),
        )
    else:
        # row count is arbitrary for a zero map: it contributes exactly 0
        pad = Charge(center=(0.0,), radius=1.0, linmap=((0.0,) * extra,))
    return FinDimPerturbation(list(phi.charges) + [pad])


# ---------------------------------------------------------------------------
# counting


def _counting_cells(fam: ToyFredholmFamily):
    """Base cells carrying counts: dimension -index (None for a point base)."""
    if fam.base_dim == 0:
        return [None]
    k = -fam.index
    return list(fam.base.cells_of_dim(k))


def _cell_domain(fam: ToyFredholmFamily, cell):
    """Box (lows, highs) of free base coords x fiber box, plus embed data."""
    r = fam.properness_radius
    d = fam.fiber_dim
    if cell is None or not cell.free_axes:
        lows = [-r] * d
        highs = [r] * d
        fixed = tuple(cell.lows) if cell is not None else ()
        return lows, highs, (tuple(), fixed)
    free = cell.free_axes
    fixed = tuple(cell.lows)
    lows = [0.0] * len(free) + [-r] * d
    highs = [1.0] * len(free) + [r] * d
    return lows, highs, (free, fixed)


def _embedded_map(evaluator, embed, fiber_dim):
    free, fixed = embed
    k_free = len(free)
    base_len = len(fixed)

    def f(pts):
        pts = np.asarray(pts, dtype=float)
        x = pts[..., k_free:]
        b = np.empty(pts.shape[:-1] + (base_len,))
        b[...] = np.asarray(fixed, dtype=float)
        for slot, axis in enumerate(free):
            b[..., axis] = pts[..., slot]
        return evaluator(b, x)

    return f


def _split_full(fam, cell, z, k_free):
    if cell is None:
        return np.zeros(0), np.asarray(z)
    b_full = np.asarray(cell.lows, dtype=float).copy()
    for slot, axis in enumerate(cell.free_axes):
        b_full[axis] = z[slot]
    return b_full, np.asarray(z[k_free:])


def _draw_shift(phi, floor, rng):
    n = phi.total_dim
    if n == 0:
        return None
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    eps = floor / (10.0 * max(1.0, phi.operator_bound()))
    return eps * v


def _count_on_cell(fam, phi, cell, ring, rng, base_grid=None):
    lows, highs, embed = _cell_domain(fam, cell)
    floor = _boundary_floor_on_cell(fam, cell)
    last_err = None
    for _ in range(MAX_SHIFT_REDRAWS):
        shift = _draw_shift(phi, floor, rng) if phi is not None else None
        f = _embedded_map(
            fam.total_map(phi, shift) if shift is not None else fam.evaluator,
            embed,
            fam.fiber_dim,
        )
        try:
            res = _stable_count(f, lows, highs, ring, base_grid=base_grid)
        except TransversalityError as err:
            last_err = err
            continue
        k_free = len(cell.free_axes) if cell is not None else 0
        _reject_boundary_zeros(res, k_free, fam.properness_radius)
        return res
    raise TransversalityError(
        f"transversality failure after {MAX_SHIFT_REDRAWS} shift redraws: {last_err}"
    )


def _reject_boundary_zeros(res: CountResult, k_free: int, radius: float):
    for z, _ in res.zeros:
        for u in z[:k_free]:
            if u < 1e-8 or u > 1 - 1e-8:
                raise VNEngineError(
                    f"zero at {z} touches the base-cell boundary; refine the family"
                )
        x = np.asarray(z[k_free:])
        if np.linalg.norm(x) > radius - 1e-8:
            raise PropernessError(
                f"zero at {z} touches the properness radius {radius}"
            )


def _boundary_floor_on_cell(fam, cell):
    """min |s| over the cell's base boundary x fiber ball, and the fiber
    sphere; this is the inductive-section condition for the cell."""
    floor = fam.boundary_floor()
    if cell is None or not cell.free_axes:
        return floor
    d = fam.fiber_dim
    r = fam.properness_radius
    ball = _ball_samples(d, r)
    for slot, axis in enumerate(cell.free_axes):
        for val in (0.0, 1.0):
            bs = _face_samples(cell, slot, val)
            b = np.repeat(bs, len(ball), axis=0)
            x = np.tile(ball, (len(bs), 1))
            vals = fam.evaluator(b, x)
            m = float(np.min(np.linalg.norm(vals, axis=-1)))
            if m <= 1e-9:
                raise VNEngineError(
                    f"section vanishes on the boundary face t{axis+1}={int(val)} "
                    f"of cell {cell.id!r} (|s| floor {m:.2e})"
                )
            floor = min(floor, m)
    return floor


def _ball_samples(d, r, per_axis=7):
    axes = [np.linspace(-r, r, per_axis) for _ in range(d)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return mesh[np.linalg.norm(mesh, axis=1) <= r]


def _face_samples(cell, slot, val, per_axis=9):
    free = cell.free_axes
    others = [i for i in range(len(free)) if i != slot]
    base = np.asarray(cell.lows, dtype=float)
    if not others:
        b = base.copy()
        b[free[slot]] = val
        return b[None]
    axes = [np.linspace(0.0, 1.0, per_axis) for _ in others]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(others))
    out = np.repeat(base[None], len(mesh), axis=0)
    out[:, free[slot]] = val
    for col, idx in enumerate(others):
        out[:, free[idx]] = mesh[:, col]
    return out


def count_point(
    fam: ToyFredholmFamily, phi: FinDimPerturbation = None, seed: int = 0, ring: str = "Z"
) -> CountResult:
    """Signed (ring='Z') or parity (ring='F2') zero count over a point base.

    The perturbation defaults to build_perturbation; the count is the number
    of zeros of s + phi(., eps v) for a seeded generic shift eps v, stable
    under grid refinement and independent of phi.
    """
    if fam.base_dim != 0:
        raise VNEngineError("count_point needs a point base; use family_class")
    if fam.index != 0:
        raise VNEngineError(
            f"nonzero index {fam.index} needs a family base or a cutting class"
        )
    if phi is None:
        phi = build_perturbation(fam, seed)
    rng = np.random.default_rng(seed)
    return _count_on_cell(fam, phi, None, ring, rng)


def family_class(
    fam: ToyFredholmFamily,
    phi: FinDimPerturbation = None,
    seed: int = 0,
    ring: str = None,
    nowhere_zero=(),
    return_details: bool = False,
):
    """Per-cell counts over the degree (-index) cells, as a cellular cochain.

    Precondition per counted cell: the section does not vanish over the
    cell's boundary faces (checked by sampling).  ``nowhere_zero`` names
    cells on which the section is asserted to have no zeros at all; they are
    verified and get a hard error when violated.
    """
    k = -fam.index
    if k < 0:
        raise VNEngineError(
            f"positive index {fam.index}: counting needs a cutting class, "
            "which is out of engine scope"
        )
    if ring is None:
        ring = "Z" if fam.orientation_consistent else "F2"
    if ring == "Z" and not fam.orientation_consistent:
        raise VNEngineError(
            "integer counts need orientation-compatible transitions; use ring='F2'"
        )
    if phi is None:
        phi = build_perturbation(fam, seed)
    rng = np.random.default_rng(seed)
    for cell_id in nowhere_zero:
        _assert_cell_zero_free(fam, cell_id)
    counts = {}
    details = {}
    for cell in _counting_cells(fam):
        if cell is None:
            raise VNEngineError("point base: use count_point")
        res = _count_on_cell(fam, phi, cell, ring, rng)
        counts[cell.id] = res.value
        details[cell.id] = res
    out = class_from_cell_counts(fam.base, counts, ring)
    if return_details:
        return out, details
    return out


def _assert_cell_zero_free(fam, cell_id):
    cell = fam.base.cell(cell_id)
    lows, highs, embed = _cell_domain(fam, cell)
    f = _embedded_map(fam.evaluator, embed, fam.fiber_dim)
    zeros, _ = _find_zeros_at_level(f, lows, highs, 12)
    if zeros:
        raise VNEngineError(
            f"section vanishes on declared zero-free cell {cell_id!r} "
            f"near {np.round(zeros[0], 4).tolist()}"
        )


# ---------------------------------------------------------------------------
# twisted families


def assemble_twisted_family(
    cube_family: ToyFredholmFamily, transitions, name: str = ""
) -> ToyFredholmFamily:
    """Glue a cube family into a torus family via per-axis transitions.

    ``transitions`` maps axis -> (fiber map A, target map B), both invertible;
    descent needs s(b|_{t_i=0}, A_i x) = B_i s(b|_{t_i=1}, x) (checked on
    samples) and commutation of distinct axes' maps (the cocycle condition on
    codimension-2 overlaps; violations are reported with the offending pair).
    """
    if cube_family.base.kind not in ("cube",):
        raise VNEngineError("assemble_twisted_family expects a cube-based family")
    n = cube_family.base_dim
    trans = {}
    for axis, (a, bmat) in transitions.items():
        a = np.asarray(a, dtype=float)
        bmat = np.asarray(bmat, dtype=float)
        if abs(np.linalg.det(a)) < 1e-12 or abs(np.linalg.det(bmat)) < 1e-12:
            raise CocycleError(f"transition on axis {axis} is not invertible")
        trans[int(axis)] = (a, bmat)
    for i in range(n):
        trans.setdefault(i, (np.eye(cube_family.fiber_dim), np.eye(cube_family.target_dim)))
    for i, j in itertools.combinations(sorted(trans), 2):
        ai, bi = trans[i]
        aj, bj = trans[j]
        if not (np.allclose(ai @ aj, aj @ ai) and np.allclose(bi @ bj, bj @ bi)):
            raise CocycleError(
                f"cocycle violation: transitions on axes {i} and {j} do not "
                "commute on the codimension-2 overlap"
            )
    _check_descent(cube_family, trans)
    return ToyFredholmFamily(
        base=build_torus(n),
        fiber_dim=cube_family.fiber_dim,
        target_dim=cube_family.target_dim,
        evaluator=cube_family.evaluator,
        properness_radius=cube_family.properness_radius,
        transitions=trans,
        name=name or (cube_family.name + "/torus"),
    )


def _check_descent(fam, trans):
    rng = np.random.default_rng(7)
    n = fam.base_dim
    d = fam.fiber_dim
    r = fam.properness_radius
    for axis, (a, bmat) in trans.items():
        bs = rng.uniform(0, 1, size=(16, n))
        xs = rng.uniform(-r / 2, r / 2, size=(16, d))
        b0 = bs.copy()
        b0[:, axis] = 0.0
        b1 = bs.copy()
        b1[:, axis] = 1.0
        lhs = fam.evaluator(b0, xs @ a.T)
        rhs = fam.evaluator(b1, xs) @ bmat.T
        if not np.allclose(lhs, rhs, atol=1e-9):
            raise CocycleError(
                f"section does not descend through the axis-{axis} transition"
            )


def pullback_circle_family(fam: ToyFredholmFamily, k: int) -> ToyFredholmFamily:
    """Pull a circle-based family back along the degree-k self-map."""
    if fam.base.kind != "torus" or fam.base_dim != 1:
        raise VNEngineError("pullback_circle_family expects a circle base")
    if k < 1:
        raise VNEngineError("degree must be a positive integer")
    a, bmat = fam.transitions.get(0, (np.eye(fam.fiber_dim), np.eye(fam.target_dim)))
    binv = np.linalg.inv(bmat)

    def ev(b, x):
        b = np.asarray(b, dtype=float)
        x = np.asarray(x, dtype=float)
        t = b[..., 0]
        j = np.minimum(np.floor(k * t), k - 1).astype(int)
        out = np.empty(x.shape[:-1] + (fam.target_dim,))
        for jv in range(k):
            mask = j == jv
            if not np.any(mask):
                continue
            aj = np.linalg.matrix_power(a, jv)
            bj = np.linalg.matrix_power(binv, jv)
            bb = (k * t[mask] - jv)[..., None]
            out[mask] = fam.evaluator(bb, x[mask] @ aj.T) @ bj.T
        return out

    return ToyFredholmFamily(
        base=build_torus(1),
        fiber_dim=fam.fiber_dim,
        target_dim=fam.target_dim,
        evaluator=ev,
        properness_radius=fam.properness_radius,
        transitions={
            0: (np.linalg.matrix_power(a, k), np.linalg.matrix_power(bmat, k))
        },
        name=f"{fam.name}^*{k}",
    )


# ---------------------------------------------------------------------------
# well-definedness checks


@dataclass
class IndependenceVerdict:
    equal: bool
    results: tuple

    def __bool__(self):
        return self.equal


def check_perturbation_independence(
    fam: ToyFredholmFamily, phi1, phi2, seed: int = 0, ring: str = None
) -> IndependenceVerdict:
    """Count with two perturbations; the values must agree."""
    if fam.base_dim == 0:
        r1 = count_point(fam, phi1, seed=seed, ring=ring or "Z")
        r2 = count_point(fam, phi2, seed=seed + 1, ring=ring or "Z")
        return IndependenceVerdict(equal=(r1.value == r2.value), results=(r1, r2))
    c1 = family_class(fam, phi1, seed=seed, ring=ring)
    c2 = family_class(fam, phi2, seed=seed + 1, ring=ring)
    return IndependenceVerdict(equal=(c1.values == c2.values), results=(c1, c2))


@dataclass
class CobordismVerdict:
    equal: bool
    results: tuple
    floor: float

    def __bool__(self):
        return self.equal


def check_cobordism_invariance(
    fam0: ToyFredholmFamily,
    fam1: ToyFredholmFamily,
    homotopy=None,
    seed: int = 0,
    ring: str = None,
) -> CobordismVerdict:
    """Counts agree when the (default linear) homotopy never vanishes on the
    boundary: base-cell boundaries x ball, and cell x fiber sphere, for all
    sampled homotopy times."""
    if homotopy is None:
        def homotopy(tau, b, x):
            return (1 - tau) * fam0.evaluator(b, x) + tau * fam1.evaluator(b, x)

    floor = math.inf
    r = max(fam0.properness_radius, fam1.properness_radius)
    d = fam0.fiber_dim
    sphere = _sphere_samples(d, fam0.properness_radius)
    ball = _ball_samples(d, fam0.properness_radius)
    bases = fam0._base_probe_points()
    for tau in np.linspace(0.0, 1.0, 11):
        b = np.repeat(bases, len(sphere), axis=0)
        x = np.tile(sphere, (len(bases), 1))
        vals = homotopy(tau, b, x)
        m = float(np.min(np.linalg.norm(vals, axis=-1)))
        if m <= 1e-9:
            bad = int(np.argmin(np.linalg.norm(vals, axis=-1)))
            raise VNEngineError(
                f"homotopy vanishes near (b={b[bad].tolist()}, x={x[bad].tolist()}, "
                f"tau={tau:.2f})"
            )
        floor = min(floor, m)
        for cell in _counting_cells(fam0):
            if cell is None or not cell.free_axes:
                continue
            for slot in range(len(cell.free_axes)):
                for val in (0.0, 1.0):
                    bs = _face_samples(cell, slot, val)
                    bb = np.repeat(bs, len(ball), axis=0)
                    xx = np.tile(ball, (len(bs), 1))
                    vals = homotopy(tau, bb, xx)
                    m = float(np.min(np.linalg.norm(vals, axis=-1)))
                    if m <= 1e-9:
                        bad = int(np.argmin(np.linalg.norm(vals, axis=-1)))
                        raise VNEngineError(
                            f"homotopy vanishes near (b={bb[bad].tolist()}, "
                            f"x={xx[bad].tolist()}, tau={tau:.2f})"
                        )
                    floor = min(floor, m)
    if fam0.base_dim == 0:
        r0 = count_point(fam0, seed=seed, ring=ring or "Z")
        r1 = count_point(fam1, seed=seed, ring=ring or "Z")
        return CobordismVerdict(equal=(r0.value == r1.value), results=(r0, r1), floor=floor)
    c0 = family_class(fam0, seed=seed, ring=ring)
    c1 = family_class(fam1, seed=seed, ring=ring)
    return CobordismVerdict(equal=(c0.values == c1.values), results=(c0, c1), floor=floor)


# ---------------------------------------------------------------------------
# independent planar oracle


def winding_number(f, radius: float, samples: int = 2048) -> int:
    """Winding number of x -> f(x)/|f(x)| around the radius circle.

    Independent of the grid/Newton counting path: pure angle tracking, with
    sample doubling until every step turns by less than pi/2.
    """
    for _ in range(8):
        th = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
        pts = radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
        vals = np.asarray(f(pts), dtype=float)
        if np.min(np.linalg.norm(vals, axis=-1)) <= 1e-12:
            raise VNEngineError("map vanishes on the circle; winding undefined")
        ang = np.arctan2(vals[:, 1], vals[:, 0])
        dth = np.diff(np.concatenate([ang, ang[:1]]))
        dth = (dth + math.pi) % (2 * math.pi) - math.pi
        if np.max(np.abs(dth)) < math.pi / 2:
            return int(round(float(np.sum(dth)) / (2 * math.pi)))
        samples *= 2
    raise StabilityError("winding number failed to stabilize")


# ---------------------------------------------------------------------------
# polynomial expression grammar and built-in families

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_ALLOWED_UNARY = (ast.USub, ast.UAdd)


def compile_polynomial(expr: str, base_vars: int, fiber_vars: int):
    """Compile one component expression in b1..bk, x1..xd to a vectorized
    callable (b, x) -> array.

    The grammar is tiny on purpose: numbers, the named variables, + - * /,
    integer powers, parentheses.  Anything else is rejected.
    """
    names = {f"b{i+1}" for i in range(base_vars)} | {
        f"x{i+1}" for i in range(fiber_vars)
    }
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if isinstance(node, ast.Expression):
            continue
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            if isinstance(node.op, ast.Pow):
                if not (
                    isinstance(node.right, ast.Constant)
                    and isinstance(node.right.value, int)
                    and node.right.value >= 0
                ):
                    raise ValueError(f"powers must be literal nonneg ints: {expr!r}")
            continue
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, _ALLOWED_UNARY):
            continue
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            continue
        if isinstance(node, ast.Name) and node.id in names:
            continue
        if isinstance(node, (ast.Load, ast.operator, ast.unaryop)):
            continue
        raise ValueError(
            f"disallowed syntax {type(node).__name__} in expression {expr!r}"
        )
    code = compile(tree, "<famclass-poly>", "eval")

    def run(b, x):
        env = {}
        for i in range(base_vars):
            env[f"b{i+1}"] = b[..., i]
        for i in range(fiber_vars):
            env[f"x{i+1}"] = x[..., i]
        val = eval(code, {"__builtins__": {}}, env)  # validated AST above
        return np.broadcast_to(np.asarray(val, dtype=float), b.shape[:-1]).copy() \
            if np.ndim(val) == 0 else np.asarray(val, dtype=float)

    return run


def family_from_polynomials(
    components,
    base: CellComplex,
    fiber_dim: int,
    properness_radius: float,
    transitions=None,
    name: str = "",
) -> ToyFredholmFamily:
    """Family whose section components are grammar expressions."""
    k = base.dim
    funcs = [compile_polynomial(c, k, fiber_dim) for c in components]

    def ev(b, x):
        return np.stack([fn(b, x) for fn in funcs], axis=-1)

    fam = ToyFredholmFamily(
        base=base,
        fiber_dim=fiber_dim,
        target_dim=len(components),
        evaluator=ev,
        properness_radius=properness_radius,
        name=name,
    )
    if transitions:
        if base.kind != "cube":
            raise VNEngineError("transitions need a cube base to glue")
        return assemble_twisted_family(fam, transitions, name=name)
    return fam


def _moebius_cube(n: int) -> ToyFredholmFamily:
    comps = []
    for i in range(n):
        comps.append(f"x{i+1}")
        comps.append(f"1 - 2*b{i+1}")

    return family_from_polynomials(
        comps, build_cube(n), fiber_dim=n, properness_radius=2.0, name=f"moebius-cube-{n}"
    )


def _moebius_transitions(n: int):
    out = {}
    for i in range(n):
        a = np.eye(n)
        b = np.eye(2 * n)
        b[2 * i + 1, 2 * i + 1] = -1.0
        out[i] = (a, b)
    return out


def builtin_family(name: str, n: int = None) -> ToyFredholmFamily:
    """Shipped toy sections, addressable by name.

    line-linear, line-square, line-cubic: point base, fiber R, the sections
    x, x^2, x^3 - x on |x| <= 2.  planar-z2: the complex square as a real
    plane map.  moebius-1 / moebius-prod-n: the circle (torus) families whose
    odd twisted count generates H^n of the torus.  product-trivial-1: the
    untwisted nowhere-zero circle family.
    """
    if name == "line-linear":
        return family_from_polynomials(
            ["x1"], build_point(), 1, 2.0, name=name
        )
    if name == "line-square":
        return family_from_polynomials(["x1**2 - 1"], build_point(), 1, 2.0, name=name)
    if name == "line-square-tangent":
        return family_from_polynomials(["x1**2"], build_point(), 1, 2.0, name=name)
    if name == "line-cubic":
        return family_from_polynomials(
            ["x1**3 - x1"], build_point(), 1, 2.0, name=name
        )
    if name == "planar-z2":
        return family_from_polynomials(
            ["x1**2 - x2**2", "2*x1*x2"], build_point(), 2, 1.5, name=name
        )
    if name == "moebius-1":
        return assemble_twisted_family(
            _moebius_cube(1), _moebius_transitions(1), name=name
        )
    if name == "moebius-prod-n":
        n = n or 2
        if not 1 <= n <= 3:
            raise VNEngineError("moebius-prod-n supports 1 <= n <= 3")
        return assemble_twisted_family(
            _moebius_cube(n), _moebius_transitions(n), name=f"moebius-prod-{n}"
        )
    if name == "product-trivial-1":
        return family_from_polynomials(
            ["x1", "1"],
            build_cube(1),
            1,
            2.0,
            transitions={0: (np.eye(1), np.eye(2))},
            name=name,
        )
    raise KeyError(f"no builtin family named {name!r}")


BUILTIN_FAMILIES = (
    "line-linear",
    "line-square",
    "line-square-tangent",
    "line-cubic",
    "planar-z2",
    "moebius-1",
    "moebius-prod-n",
    "product-trivial-1",
)


def family_from_spec(spec, name: str = "") -> ToyFredholmFamily:
    """Build a family from its manifest JSON form.

    Schema: {"base": {"kind": "point"} or {"kind": "cube", "n": k},
    "fiber_dim": d, "radius": R, "components": [expr, ...] in b1..bk/x1..xd,
    "transitions": {axis: {"fiber": [[..]], "target": [[..]]}} (optional;
    glues the cube into a torus)}.
    """
    basespec = spec.get("base", {"kind": "point"})
    kind = basespec.get("kind", "point")
    if kind == "point":
        base = build_point()
    elif kind == "cube":
        base = build_cube(int(basespec["n"]))
    else:
        raise VNEngineError(f"unknown base kind {kind!r}")
    transitions = None
    if spec.get("transitions"):
        transitions = {
            int(axis): (np.asarray(t["fiber"], dtype=float),
                        np.asarray(t["target"], dtype=float))
            for axis, t in spec["transitions"].items()
        }
    return family_from_polynomials(
        spec["components"],
        base,
        int(spec["fiber_dim"]),
        float(spec.get("radius", 2.0)),
        transitions=transitions,
        name=name or spec.get("name", "manifest-family"),
    )
