"""Named end-to-end scenarios and the obstruction verdict logic.

Each scenario runs the full pipeline: formal dimensions and the b+ hypothesis
first (failures abort before any counting), then the wall degree, the gluing
count, the cochain on the torus, the pairing, and the verdicts.  Every
theorem consumed as an axiom (the gluing formula, an imported diffeomorphism
fact, an externally supplied base invariant) lands in the assumption ledger
of the resulting report; a nonvanishing verdict with an empty ledger would be
claiming to have computed the analytic core, which nothing here does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cochain, fourman, wallcross
from .errors import FamClassError, HypothesisError
from .fourman import SO3Class, SpinCClass, standard_manifold
from .lattice import build_lattice
from .manifest import BaseInvariant, ScenarioManifest, load_manifest

__all__ = [
    "VerdictReport",
    "run_scenario",
    "obstruction_report",
    "SCENARIOS",
]


@dataclass
class VerdictReport:
    scenario: str
    params: dict
    ring: str
    formal_dimension: int
    bplus: int
    degree_n: int
    wall_degree: int = None
    glued_count: int = None
    cochain: dict = None
    pairing: int = None
    is_generator: bool = None
    nonvanishing: bool = False
    homeo_trivial_note: str = ""
    membership: dict = field(default_factory=dict)
    assumptions: list = field(default_factory=list)
    obstructions: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nonvanishing and not self.assumptions:
            raise FamClassError(
                "nonvanishing verdict with an empty assumption ledger"
            )

    def to_json(self):
        return {
            "scenario": self.scenario,
            "params": dict(self.params),
            "ring": self.ring,
            "formal_dimension": self.formal_dimension,
            "bplus": self.bplus,
            "degree_n": self.degree_n,
            "wall_degree": self.wall_degree,
            "glued_count": self.glued_count,
            "cochain": dict(self.cochain) if self.cochain else None,
            "pairing": self.pairing,
            "is_generator": self.is_generator,
            "nonvanishing": self.nonvanishing,
            "homeo_trivial_note": self.homeo_trivial_note,
            "membership": dict(self.membership),
            "assumptions": list(self.assumptions),
            "obstructions": list(self.obstructions),
            "extra": dict(self.extra),
        }


def _require(cond, msg):
    if not cond:
        raise HypothesisError(msg)


def _k3_sum_descriptor(n):
    x = standard_manifold("K3")
    for _ in range(n):
        x, _ = fourman.connected_sum(x, standard_manifold("S2xS2"))
    return x


def _reflection_block_diffeo(n_blocks, i, base_rank):
    """minus-identity on the i-th hyperbolic block, identity elsewhere,
    embedded after ``base_rank`` leading coordinates."""
    m = np.eye(base_rank + 2 * n_blocks, dtype=np.int64)
    j = base_rank + 2 * i
    m[j : j + 2, j : j + 2] = -np.eye(2, dtype=np.int64)
    return m


def k3_sum_scenario(n: int, manifest: ScenarioManifest = None, seed: int = 0):
    """Spin count for K3 # n(S2xS2) over the n-torus of commuting reflections."""
    _require(1 <= n <= 4, f"k3-sum carries its class on T^n with n <= 4, got {n}")
    manifest = manifest or ScenarioManifest()
    x = _k3_sum_descriptor(n)
    s = SpinCClass([0] * x.lattice.rank)
    d = fourman.formal_dim_sw(x, s)
    _require(d == -n, f"formal dimension {d} != -{n}")
    bp = fourman.b_plus(x)
    _require(
        fourman.check_bplus_condition(x, n), f"b+ = {bp} < n + 2 = {n + 2}"
    )

    membership = {}
    all_oriented = True
    for i in range(n):
        m = _reflection_block_diffeo(n, i, base_rank=22)
        rep = fourman.group_membership(x, s, m)
        membership[f"f{i+1}"] = {
            "preserves_class": rep.preserves_class,
            "preserves_homology_orientation": rep.preserves_homology_orientation,
            "coefficient_ring": rep.coefficient_ring,
        }
        _require(rep.preserves_class, f"reflection f{i+1} moves the spin class")
        all_oriented = all_oriented and rep.preserves_homology_orientation
    ring = "Z" if all_oriented else "F2"

    fam = wallcross.reflection_family(n)
    deg = wallcross.boundary_degree(fam, seed=seed)

    if "SW(K3,spin)" in manifest.base_invariants:
        base = manifest.invariant("SW(K3,spin)")
    else:
        base = BaseInvariant(
            name="SW(K3,spin)",
            value=1,
            provenance="input: Seiberg-Witten count of the K3 spin structure "
            "is 1 (odd); standard value, supplied, not computed",
        )
    glued = wallcross.gluing_count(deg.value, base.value)

    torus = cochain.build_torus(n)
    top = torus.cells_of_dim(n)[0]
    klass = cochain.class_from_cell_counts(torus, {top.id: glued.value}, ring)
    pairing = cochain.pair_fundamental(klass)
    generator = cochain.CellCochain(torus, n, ring, {top.id: 1})
    is_gen = klass == generator

    assumptions = [
        "gluing formula: parameterized count = wall degree x base invariant "
        "(theorem-given, not recomputed)",
        f"base invariant {base.name} = {base.value}: {base.provenance}",
        "existence of commuting reflections on each S2xS2 summand acting as "
        "minus-identity on its H^2 block (imported diffeomorphism fact)",
    ]
    return VerdictReport(
        scenario="k3-sum",
        params={"n": n},
        ring=ring,
        formal_dimension=d,
        bplus=bp,
        degree_n=n,
        wall_degree=deg.value,
        glued_count=glued.value,
        cochain=klass.values,
        pairing=pairing,
        is_generator=is_gen,
        nonvanishing=bool(pairing),
        membership=membership,
        assumptions=assumptions,
        extra={"wall_degree_trace": [list(t) for t in deg.trace]},
    )


def _dissolve_pair(n):
    x = standard_manifold("K3")
    for _ in range(n):
        x, _ = fourman.connected_sum(x, standard_manifold("CP2+2(-CP2)"))
    y = fourman.FourManifoldDescriptor(
        name=f"({n+3})CP2 # ({2*n+19})(-CP2)",
        b1=0,
        lattice=build_lattice(
            [{"type": "diag", "entries": [1] * (n + 3) + [-1] * (2 * n + 19)}]
        ),
    )
    return x, y


def dissolve_scenario(n: int, manifest: ScenarioManifest = None, seed: int = 0):
    """Composition scenario on K3 # n(CP2 # 2(-CP2)), which is homeomorphic to
    (n+3)CP2 # (2n+19)(-CP2): the composed diffeomorphisms are topologically
    trivial, but the mod-2 class survives when n is a power of two."""
    _require(1 <= n <= 16, f"dissolve supports 1 <= n <= 16, got {n}")
    manifest = manifest or ScenarioManifest()
    x, y = _dissolve_pair(n)
    match, report = fourman.homeo_invariants_match(x, y)
    _require(match, f"homeomorphism invariants disagree: {report}")

    c1 = [0] * 22 + [1, 1, 1] * n
    s = SpinCClass(c1)
    d = fourman.formal_dim_sw(x, s)
    _require(d == -n, f"formal dimension {d} != -{n}")
    bp = fourman.b_plus(x)
    _require(fourman.check_bplus_condition(x, n), f"b+ = {bp} < n + 2")

    if "SW(K3,complex)" in manifest.base_invariants:
        sw0 = manifest.invariant("SW(K3,complex)").value
        prov0 = manifest.invariant("SW(K3,complex)").provenance
    else:
        sw0, prov0 = 1, (
            "input: base count on the K3 side is 1 (odd); supplied, not computed"
        )
    table = wallcross.CompositionTable.from_endpoints(
        n, zero_side_value=sw0, one_side_value=2
    )
    total, contributing = wallcross.composition_sum(table)
    power_of_two = n & (n - 1) == 0

    # the torus carrier exists only up to dimension 4; beyond that the
    # parity verdict stands alone
    torus = cochain.build_torus(n) if n <= 4 else None
    klass = None
    pairing = total
    if torus is not None:
        top = torus.cells_of_dim(torus.dim)[0]
        klass = cochain.class_from_cell_counts(torus, {top.id: total}, "F2")

    assumptions = [
        f"base invariant SW on the K3 side = {sw0}: {prov0}",
        "base invariant on the dissolved side = 2 (even): standard vanishing "
        "for connected sums of positive-b+ pieces, supplied",
        "the composed diffeomorphisms and the dissolving homeomorphism are "
        "imported facts",
        "per-signature counts depend only on the number of 0-side factors "
        "(symmetry), theorem-given",
    ]
    if not power_of_two:
        assumptions.append(
            "middle signature values defaulted to 0; for n not a power of two "
            "the verdict depends on them"
        )
    note = (
        "bundle is topologically trivial (mapping torus of a topologically "
        "isotopic-to-identity map) but smoothly nontrivial"
        if n == 1 and total
        else ("Homeo-triviality asserted only for n = 1" if total else "")
    )
    return VerdictReport(
        scenario="dissolve",
        params={"n": n, "power_of_two": power_of_two},
        ring="F2",
        formal_dimension=d,
        bplus=bp,
        degree_n=n,
        glued_count=total,
        cochain=klass.values if klass is not None else None,
        pairing=pairing,
        is_generator=bool(total) if klass is not None else None,
        nonvanishing=bool(total),
        homeo_trivial_note=note,
        membership={},
        assumptions=assumptions,
        extra={
            "homeo_invariants": {k: list(v) for k, v in report.items()},
            "contributing_signatures": list(contributing),
        },
    )


def composition_scenario(
    n: int,
    values=None,
    manifest: ScenarioManifest = None,
    seed: int = 0,
):
    """Plain composition-parity run: supply per-signature values, get the
    mod-2 verdict and which signatures contributed."""
    _require(1 <= n <= 16, f"composition supports 1 <= n <= 16, got {n}")
    if values is None:
        table = wallcross.CompositionTable.from_endpoints(n, 1, 2)
    else:
        table = wallcross.CompositionTable(n=n, values=values)
    total, contributing = wallcross.composition_sum(table)
    assumptions = [
        "per-signature invariant values are inputs with stated provenance",
        "symmetry reduction over factor choices, theorem-given",
    ]
    return VerdictReport(
        scenario="composition",
        params={"n": n, "values": dict(table.values)},
        ring="F2",
        formal_dimension=-n,
        bplus=n + 2,
        degree_n=n,
        glued_count=total,
        pairing=total,
        nonvanishing=bool(total),
        assumptions=assumptions,
        extra={"contributing_signatures": list(contributing)},
    )


def ruberman_asd_scenario(
    donaldson_value: int = 1, manifest: ScenarioManifest = None, seed: int = 0
):
    """Degree-one integer class from a 1-parameter anti-self-dual count.

    The base manifold carries an SO(3) class of formal dimension zero with
    nonvanishing integer Donaldson invariant q (an input); summing with
    CP2 # 2(-CP2) and twisting by the line-bundle class drops the dimension
    to -1, and the circle-family count is -4q, up to the engine's global
    sign convention.
    """
    manifest = manifest or ScenarioManifest()
    q = int(donaldson_value)

    base = fourman.FourManifoldDescriptor(
        name="M0",
        b1=0,
        lattice=build_lattice([{"type": "diag", "entries": [1, 1, 1, -1, -1, -1]}]),
    )
    p0 = SO3Class(p1=-6, w2=[1, 1, 0, 0, 0, 0])
    d0 = fourman.formal_dim_asd(base, p0)
    _require(d0 == 0, f"base formal dimension {d0} != 0")

    x, p = fourman.connected_sum(
        base, standard_manifold("CP2+2(-CP2)"), p0, SO3Class(p1=-1, w2=[1, 1, 1])
    )
    d = fourman.formal_dim_asd(x, p)
    _require(d == -1, f"summed formal dimension {d} != -1")
    bp = fourman.b_plus(x)
    _require(fourman.check_bplus_condition(x, 1), f"b+ = {bp} < 3")

    value = -4 * q
    circle = cochain.build_torus(1)
    edge = circle.cells_of_dim(1)[0]
    klass = cochain.class_from_cell_counts(circle, {edge.id: value}, "Z")
    pairing = cochain.pair_fundamental(klass)

    assumptions = [
        f"base Donaldson invariant q = {q} is an input with provenance "
        "'supplied'; computing it is out of scope",
        "circle-family count = -4 x (base Donaldson invariant): "
        "theorem-given formula, applied as an axiom",
        "the diffeomorphism preserving the SO(3) class and the homology "
        "orientation is an imported fact",
    ]
    return VerdictReport(
        scenario="ruberman-asd",
        params={"donaldson_value": q},
        ring="Z",
        formal_dimension=d,
        bplus=bp,
        degree_n=1,
        glued_count=value,
        cochain=klass.values,
        pairing=pairing,
        is_generator=None,
        nonvanishing=(q != 0),
        assumptions=assumptions,
        extra={"sign_convention": "value reported up to the global engine sign"},
    )


SCENARIOS = {
    "k3-sum": k3_sum_scenario,
    "dissolve": dissolve_scenario,
    "composition": composition_scenario,
    "ruberman-asd": ruberman_asd_scenario,
}


def run_scenario(name: str, manifest=None, seed: int = 0, **params) -> VerdictReport:
    """Dispatch a named scenario; manifest may be a path, dict, or object."""
    if name not in SCENARIOS:
        raise FamClassError(
            f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}"
        )
    mf = load_manifest(manifest) if manifest is not None else None
    return SCENARIOS[name](manifest=mf, seed=seed, **params)


def obstruction_report(verdict: VerdictReport, decompositions=(), psc_nonempty=False):
    """Evaluate fiberwise-splitting and metric-family obstructions.

    Each proposed decomposition is a pair of descriptors whose lattices must
    direct-sum (blockwise, in order) to the scenario manifold's; a split with
    both b+ strictly above the class degree is forbidden by a nonvanishing
    class.  With a positive-scalar-curvature space asserted nonempty, a
    nonvanishing spin-c verdict rules out metric families over the n-skeleton.
    """
    n = verdict.degree_n
    flags = []
    if not verdict.nonvanishing:
        for pair in decompositions:
            flags.append(
                {"decomposition": _dec_names(pair), "verdict": "no obstruction "
                 "(class vanishes)"}
            )
        if psc_nonempty:
            flags.append({"psc": "no obstruction (class vanishes)"})
        verdict.obstructions.extend(flags)
        return flags
    for pair in decompositions:
        x1, x2 = pair
        b1p, b2p = fourman.b_plus(x1), fourman.b_plus(x2)
        if b1p > n and b2p > n:
            flags.append(
                {
                    "decomposition": _dec_names(pair),
                    "verdict": "forbidden",
                    "why": f"both b+ ({b1p}, {b2p}) exceed the class degree {n}",
                }
            )
        else:
            bad = 1 if b1p <= n else 2
            flags.append(
                {
                    "decomposition": _dec_names(pair),
                    "verdict": "no verdict",
                    "why": f"factor {bad} fails b+ > {n}",
                }
            )
    if psc_nonempty:
        flags.append(
            {
                "psc": f"no family of positive-scalar-curvature metrics over the "
                f"{n}-skeleton; some pi_i(PSC) != 0 for i <= {n-1}",
            }
        )
    verdict.obstructions.extend(flags)
    return flags


def _dec_names(pair):
    return [pair[0].name, pair[1].name]


def check_decomposition_lattice(verdict_manifold, pair):
    """Manifest-level check: the proposed factors' lattices must direct-sum
    to the scenario manifold's Gram matrix, blockwise in order."""
    from .lattice import direct_sum

    got = direct_sum(pair[0].lattice, pair[1].lattice)
    if not np.array_equal(got.gram, verdict_manifold.lattice.gram):
        raise FamClassError(
            "decomposition lattices do not sum to the manifold's lattice"
        )
