import numpy as np
import pytest

from famclass.errors import FamClassError, HypothesisError
from famclass.fourman import FourManifoldDescriptor, connected_sum, standard_manifold
from famclass.lattice import build_lattice
from famclass.scenarios import (
    VerdictReport,
    check_decomposition_lattice,
    obstruction_report,
    run_scenario,
)


def test_k3_sum_pipeline():
    for n in (1, 2, 3):
        rep = run_scenario("k3-sum", n=n)
        assert rep.formal_dimension == -n
        assert rep.bplus == 3 + n
        assert abs(rep.wall_degree) == 1
        assert rep.glued_count == 1
        assert rep.pairing == 1
        assert rep.is_generator
        assert rep.ring == "F2"
        assert rep.nonvanishing
        assert any("gluing" in a for a in rep.assumptions)


def test_k3_sum_membership_reverses_orientation():
    rep = run_scenario("k3-sum", n=2)
    for entry in rep.membership.values():
        assert entry["preserves_class"]
        assert not entry["preserves_homology_orientation"]
        assert entry["coefficient_ring"] == "F2"


def test_k3_sum_hypothesis_gate():
    with pytest.raises(HypothesisError):
        run_scenario("k3-sum", n=9)


def test_k3_sum_manifest_override():
    manifest = {
        "base_invariants": {
            "SW(K3,spin)": {"value": 2, "provenance": "what-if: even input"}
        }
    }
    rep = run_scenario("k3-sum", n=1, manifest=manifest)
    assert rep.glued_count == 0
    assert not rep.nonvanishing
    assert rep.pairing == 0


def test_dissolve_power_of_two():
    for n in (1, 2, 4):
        rep = run_scenario("dissolve", n=n)
        assert rep.nonvanishing
        assert rep.formal_dimension == -n
        hi = rep.extra["homeo_invariants"]
        assert hi["b_plus"] == [n + 3, n + 3]
        assert hi["b_minus"] == [2 * n + 19, 2 * n + 19]
    rep1 = run_scenario("dissolve", n=1)
    assert "topologically trivial" in rep1.homeo_trivial_note


def test_dissolve_non_power_notes_dependence():
    rep = run_scenario("dissolve", n=3)
    assert any("power of two" in a for a in rep.assumptions)


def test_composition_scenario():
    rep = run_scenario("composition", n=4)
    assert rep.pairing == 1
    assert rep.extra["contributing_signatures"] == [0, 4]
    rep = run_scenario("composition", n=3, values={3: 1, 2: 1, 1: 0, 0: 2})
    assert rep.pairing == 0
    assert not rep.nonvanishing


def test_ruberman_scenario():
    rep = run_scenario("ruberman-asd", donaldson_value=1)
    assert rep.ring == "Z"
    assert rep.cochain == {"*": -4}
    assert rep.pairing == -4
    assert rep.formal_dimension == -1
    assert rep.nonvanishing
    assert any("Donaldson" in a for a in rep.assumptions)

    rep0 = run_scenario("ruberman-asd", donaldson_value=0)
    assert not rep0.nonvanishing
    assert rep0.pairing == 0


def test_nonvanishing_requires_assumptions():
    with pytest.raises(FamClassError, match="assumption"):
        VerdictReport(
            scenario="bogus",
            params={},
            ring="F2",
            formal_dimension=0,
            bplus=3,
            degree_n=0,
            nonvanishing=True,
        )


def _k3_plus(n):
    x = standard_manifold("K3")
    for _ in range(n):
        x, _ = connected_sum(x, standard_manifold("S2xS2"))
    return x


def test_obstruction_forbidden_split():
    rep = run_scenario("k3-sum", n=2)
    x1 = _k3_plus(1)  # b+ = 4 > 2
    x2 = FourManifoldDescriptor(
        "3H", b1=0, lattice=build_lattice([{"type": "H", "count": 3}])
    )  # b+ = 3 > 2
    flags = obstruction_report(rep, decompositions=[(x1, x2)], psc_nonempty=True)
    assert flags[0]["verdict"] == "forbidden"
    assert "pi_i(PSC)" in flags[-1]["psc"]
    assert rep.obstructions


def test_obstruction_no_verdict_when_bplus_small():
    rep = run_scenario("k3-sum", n=2)
    x1 = _k3_plus(1)
    small = standard_manifold("S2xS2")  # b+ = 1 <= 2
    flags = obstruction_report(rep, decompositions=[(x1, small)])
    assert flags[0]["verdict"] == "no verdict"


def test_obstruction_vanishing_class():
    rep = run_scenario("ruberman-asd", donaldson_value=0)
    x1 = _k3_plus(1)
    flags = obstruction_report(rep, decompositions=[(x1, x1)], psc_nonempty=True)
    assert all("no obstruction" in str(f) for f in flags)


def test_decomposition_lattice_check():
    x = _k3_plus(2)
    k3 = standard_manifold("K3")
    two_h = FourManifoldDescriptor(
        "2H", b1=0, lattice=build_lattice([{"type": "H", "count": 2}])
    )
    check_decomposition_lattice(x, (k3, two_h))  # blockwise equal: fine
    with pytest.raises(FamClassError, match="do not sum"):
        check_decomposition_lattice(x, (k3, standard_manifold("S2xS2")))


def test_seed_does_not_change_verdicts():
    reference = run_scenario("k3-sum", n=2, seed=0)
    for seed in (1, 7, 123):
        rep = run_scenario("k3-sum", n=2, seed=seed)
        assert rep.pairing == reference.pairing
        assert rep.is_generator == reference.is_generator
        assert abs(rep.wall_degree) == 1
