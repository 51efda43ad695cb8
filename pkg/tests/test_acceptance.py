"""Acceptance suite: one test per release criterion, timed, one line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every expected value here is exact (integers and parities), so there
are no tolerances to tune.
"""

import math
import time

import numpy as np
import pytest

from famclass import cochain, fourman, scenarios, vnengine, wallcross
from famclass.cochain import (
    CellCochain,
    betti_numbers,
    build_torus,
    coboundary,
    cohomologous,
)
from famclass.fourman import SpinCClass, connected_sum, standard_manifold
from famclass.lattice import build_lattice, inertia, parity
from famclass.vnengine import (
    builtin_family,
    count_point,
    family_class,
    random_perturbation,
    suspend,
    winding_number,
)
from famclass.wallcross import CompositionTable, composition_sum, reflection_family


def _report(number, elapsed, limit, text):
    budget = f"limit {limit}s" if limit else "no limit"
    print(f"[criterion {number}] PASS in {elapsed:.2f}s ({budget}): {text}")


def test_criterion_1_formal_dimensions():
    t0 = time.time()
    x = standard_manifold("K3")
    for n in range(1, 9):
        x, _ = connected_sum(x, standard_manifold("S2xS2"))
        d = fourman.formal_dim_sw(x, SpinCClass([0] * x.lattice.rank))
        assert d == -n, f"n={n}: formal dimension {d}"
        assert fourman.b_plus(x) == 3 + n
        assert fourman.check_bplus_condition(x, n)
    elapsed = time.time() - t0
    assert elapsed < 1.0
    _report(1, elapsed, 1, "d(K3 # n(S2xS2), c1=0) = -n and b+ = 3+n >= n+2, n=1..8")


def test_criterion_2_lattice_invariants():
    t0 = time.time()
    k3 = build_lattice([{"type": "H", "count": 3}, {"type": "E8", "sign": -1, "count": 2}])
    assert inertia(k3) == (3, 19, -16)
    assert parity(k3) == "even"
    for n in range(1, 5):
        x = standard_manifold("K3")
        for _ in range(n):
            x, _ = connected_sum(x, standard_manifold("CP2+2(-CP2)"))
        y = fourman.FourManifoldDescriptor(
            "dissolved", b1=0,
            lattice=build_lattice(
                [{"type": "diag", "entries": [1] * (n + 3) + [-1] * (2 * n + 19)}]
            ),
        )
        match, report = fourman.homeo_invariants_match(x, y)
        assert match, report
    elapsed = time.time() - t0
    assert elapsed < 1.0
    _report(2, elapsed, 1, "inertia(K3) = (3,19,-16) even; dissolve pairs match, n=1..4")


def test_criterion_3_wall_degree():
    t0 = time.time()
    for n in (1, 2, 3):
        values = set()
        for seed in range(10):
            deg = wallcross.boundary_degree(
                reflection_family(n), seed=seed, min_doublings=2
            )
            assert len({d for _, d in deg.trace[-3:]}) == 1
            values.add(deg.value)
        assert values == {(-1) ** n}, f"n={n}: degrees {values}"
        assert all(abs(v) == 1 for v in values)
    elapsed = time.time() - t0
    assert elapsed < 30.0
    _report(
        3, elapsed, 30,
        "reflection degree +-1 for n=1,2,3; stable over 2 doublings x 10 ray seeds",
    )


def test_criterion_4_k3_scenario_end_to_end():
    t0 = time.time()
    for n in (1, 2, 3):
        rep = scenarios.run_scenario("k3-sum", n=n)
        assert rep.ring == "F2"
        assert rep.pairing == 1, f"n={n}: pairing {rep.pairing}"
        assert rep.is_generator, f"n={n}: class is not the generator"
        assert any("gluing" in a for a in rep.assumptions)
    elapsed = time.time() - t0
    _report(
        4, elapsed, None,
        "k3-sum(n=1..3): pairing 1 in F2, class = generator, gluing in ledger",
    )


def test_criterion_5_composition_combinatorics():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    for npow in range(5):  # n = 1, 2, 4, 8, 16
        n = 2**npow
        for _ in range(100):
            middles = {k: int(rng.integers(-50, 51)) for k in range(1, n)}
            table = CompositionTable.from_endpoints(n, 1, 2, middles=middles)
            total, _ = composition_sum(table)
            assert total == 1, f"n={n}: middles changed the parity"
    flips = 0
    for _ in range(100):
        middles = {k: int(rng.integers(-50, 51)) for k in range(1, 3)}
        table = CompositionTable.from_endpoints(3, 1, 2, middles=middles)
        if composition_sum(table)[0] != 1:
            flips += 1
    assert flips > 0, "no middle assignment changed the n=3 result"
    elapsed = time.time() - t0
    assert elapsed < 5.0
    _report(
        5, elapsed, 5,
        f"n=2^N parity always 1 under 100 random middles; n=3 flipped {flips}/100",
    )


POINT_SECTIONS = ("line-linear", "line-square", "line-square-tangent",
                  "line-cubic", "planar-z2")
FAMILY_SECTIONS = ("moebius-1", "product-trivial-1", "moebius-prod-n")


def test_criterion_6_well_definedness():
    t0 = time.time()
    for name in POINT_SECTIONS:
        fam = builtin_family(name)
        values = set()
        for seed in range(5):
            phi = random_perturbation(fam, seed)
            values.add(count_point(fam, phi, seed=seed).value)
            for extra in (1, 2, 3):
                values.add(count_point(fam, suspend(phi, extra), seed=seed).value)
        assert len(values) == 1, f"{name}: counts varied {values}"
    for name in FAMILY_SECTIONS:
        fam = builtin_family(name)
        values = set()
        for seed in range(5):
            phi = random_perturbation(fam, seed)
            values.add(tuple(sorted(family_class(fam, phi, seed=seed, ring="F2").values.items())))
            for extra in (1, 2, 3):
                values.add(
                    tuple(sorted(
                        family_class(fam, suspend(phi, extra), seed=seed, ring="F2").values.items()
                    ))
                )
        assert len(values) == 1, f"{name}: cochains varied {values}"
    planar = builtin_family("planar-z2")
    oracle = winding_number(
        lambda x: planar.evaluator(np.zeros((len(x), 0)), x),
        planar.properness_radius,
    )
    assert count_point(planar).value == oracle == 2
    elapsed = time.time() - t0
    assert elapsed < 60.0
    _report(
        6, elapsed, 60,
        "counts invariant over 5 perturbations x suspensions 1..3; planar = winding",
    )


def test_criterion_7_twisted_parity():
    t0 = time.time()
    moebius = family_class(builtin_family("moebius-1"), ring="F2")
    t1 = build_torus(1)
    generator = CellCochain(t1, 1, "F2", {"*": 1})
    assert moebius.values == generator.values
    trivial = family_class(builtin_family("product-trivial-1"), ring="F2")
    assert trivial.is_zero()
    elapsed = time.time() - t0
    assert elapsed < 10.0
    _report(7, elapsed, 10, "Moebius family = generator of H^1(T^1;F2); product = 0")


def test_criterion_8_cochain_engine():
    t0 = time.time()
    rng = np.random.default_rng(99)
    complexes = [build_torus(n) for n in (1, 2, 3)] + [
        cochain.build_cube(n) for n in (1, 2, 3)
    ]
    for cx in complexes:
        for _ in range(500):
            d = int(rng.integers(0, cx.dim + 1))
            ring = "Z" if rng.integers(2) else "F2"
            vals = {c.id: int(rng.integers(-9, 10)) for c in cx.cells_of_dim(d)}
            assert coboundary(coboundary(CellCochain(cx, d, ring, vals))).is_zero()
    for n in (1, 2, 3):
        expect = [math.comb(n, k) for k in range(n + 1)]
        t = build_torus(n)
        assert betti_numbers(t, "Z") == expect
        assert betti_numbers(t, "F2") == expect
    t1 = build_torus(1)
    gen = CellCochain(t1, 1, "F2", {"*": 1})
    zero = CellCochain(t1, 1, "F2", {"*": 0})
    assert not cohomologous(gen, zero)
    elapsed = time.time() - t0
    assert elapsed < 10.0
    _report(
        8, elapsed, 10,
        "dd = 0 on 500 random cochains x 6 complexes; Betti(T^n) binomial; "
        "generator detected",
    )


def test_criterion_9_ruberman_scenario():
    t0 = time.time()
    rep = scenarios.run_scenario("ruberman-asd", donaldson_value=1)
    assert rep.ring == "Z"
    assert rep.degree_n == 1
    # class value -4 on the circle, up to the documented global engine sign
    assert abs(rep.pairing) == 4 and rep.pairing == -4
    assert rep.cochain == {"*": -4}
    elapsed = time.time() - t0
    assert elapsed < 1.0
    _report(9, elapsed, 1, "ruberman-asd(q=1): class value -4 in H^1(T^1;Z)")
