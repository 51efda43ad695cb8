import numpy as np
import pytest

from famclass.cochain import build_cube, build_point
from famclass.errors import CocycleError, PropernessError
from famclass.vnengine import (
    FinDimPerturbation,
    VNEngineError,
    build_perturbation,
    builtin_family,
    check_cobordism_invariance,
    check_perturbation_independence,
    compile_polynomial,
    count_point,
    family_class,
    family_from_polynomials,
    family_from_spec,
    pullback_circle_family,
    random_perturbation,
    suspend,
    winding_number,
)


def planar_evaluator_as_plane_map(fam):
    return lambda x: fam.evaluator(np.zeros((len(x), 0)), x)


# --- point-base counts -------------------------------------------------------


def test_count_linear():
    res = count_point(builtin_family("line-linear"))
    assert res.value == 1
    assert len(res.zeros) == 1


def test_count_cubic_signed():
    res = count_point(builtin_family("line-cubic"))
    assert res.value == 1
    assert [s for _, s in res.zeros] == [1, -1, 1]
    assert count_point(builtin_family("line-cubic"), ring="F2").value == 1


def test_count_planar_square_matches_winding():
    fam = builtin_family("planar-z2")
    res = count_point(fam)
    oracle = winding_number(planar_evaluator_as_plane_map(fam), fam.properness_radius)
    assert oracle == 2  # frozen: the squaring map doubles the angle
    assert res.value == oracle


def test_count_requires_point_base():
    with pytest.raises(VNEngineError, match="point base"):
        count_point(builtin_family("moebius-1"))


def test_count_requires_index_zero():
    fam = family_from_polynomials(["x1", "x1**2 + 1"], build_point(), 1, 2.0)
    with pytest.raises(VNEngineError, match="index"):
        count_point(fam)


# --- perturbation construction -----------------------------------------------


def test_transverse_section_needs_no_charges():
    phi = build_perturbation(builtin_family("line-linear"))
    assert phi.total_dim == 0


def test_tangent_zero_gets_rank_one_charge():
    phi = build_perturbation(builtin_family("line-square-tangent"))
    assert len(phi.charges) == 1
    assert phi.charges[0].matrix().shape == (1, 1)


def test_planar_degenerate_zero_gets_plane_charge():
    phi = build_perturbation(builtin_family("planar-z2"))
    assert len(phi.charges) == 1
    assert phi.charges[0].matrix().shape == (2, 2)


def test_properness_boundary_zero_rejected():
    with pytest.raises(PropernessError):
        family_from_polynomials(["x1 - 2"], build_point(), 1, 2.0)


def test_near_boundary_zero_rejected_at_detection():
    fam = family_from_polynomials(["x1 - 1.9999993"], build_point(), 1, 2.0)
    with pytest.raises(PropernessError, match="properness violated"):
        build_perturbation(fam)


# --- well-definedness --------------------------------------------------------


def test_independence_cubic():
    fam = builtin_family("line-cubic")
    v = check_perturbation_independence(
        fam, random_perturbation(fam, 1), random_perturbation(fam, 2)
    )
    assert v.equal
    assert v.results[0].value == 1


def test_independence_no_zeros():
    fam = family_from_polynomials(["x1**2 + 1"], build_point(), 1, 2.0)
    v = check_perturbation_independence(
        fam, FinDimPerturbation([]), random_perturbation(fam, 5)
    )
    assert v.equal
    assert v.results[0].value == 0


def test_independence_moebius():
    fam = builtin_family("moebius-1")
    v = check_perturbation_independence(
        fam,
        random_perturbation(fam, 3),
        random_perturbation(fam, 4),
        ring="F2",
    )
    assert v.equal
    assert v.results[0].values == {"*": 1}


def test_independence_five_perturbations_each_builtin():
    for name in ("line-linear", "line-square-tangent", "line-cubic", "planar-z2"):
        fam = builtin_family(name)
        values = set()
        for seed in range(5):
            phi = random_perturbation(fam, seed)
            values.add(count_point(fam, phi, seed=seed).value)
        assert len(values) == 1, f"{name}: counts varied across perturbations"


def test_suspension_invariance():
    for name in ("line-square-tangent", "line-cubic", "planar-z2"):
        fam = builtin_family(name)
        phi = build_perturbation(fam)
        base = count_point(fam, phi, seed=9).value
        for extra in (1, 2, 3):
            assert count_point(fam, suspend(phi, extra), seed=9).value == base


def test_refinement_trace_stable():
    res = count_point(builtin_family("line-cubic"))
    assert len(res.trace) >= 2
    assert res.trace[-1][1] == res.trace[-2][1]


def test_refinement_stability_every_shipped_example():
    # counts at resolutions h and h/2 agree for every shipped section
    point_names = ("line-linear", "line-square", "line-square-tangent",
                   "line-cubic", "planar-z2")
    for name in point_names:
        res = count_point(builtin_family(name))
        assert res.trace[-1][1] == res.trace[-2][1], name
    for name, n in (("moebius-1", None), ("product-trivial-1", None),
                    ("moebius-prod-n", 2)):
        fam = builtin_family(name, n=n)
        _, details = family_class(fam, ring="F2", return_details=True)
        for cid, res in details.items():
            assert res.trace[-1][1] == res.trace[-2][1], (name, cid)


def test_cobordism_invariance_shifted_cubic():
    f0 = builtin_family("line-cubic")
    f1 = family_from_polynomials(["x1**3 - x1 + 0.1"], build_point(), 1, 2.0)
    v = check_cobordism_invariance(f0, f1)
    assert v.equal
    assert [r.value for r in v.results] == [1, 1]


def test_cobordism_invariance_moebius_rescaled():
    f0 = builtin_family("moebius-1")
    f1 = family_from_polynomials(
        ["2*x1", "2 - 4*b1"],
        build_cube(1),
        1,
        2.0,
        transitions={0: (np.eye(1), np.diag([1.0, -1.0]))},
    )
    v = check_cobordism_invariance(f0, f1, ring="F2")
    assert v.equal
    assert [r.values for r in v.results] == [{"*": 1}, {"*": 1}]


def test_cobordism_detects_vanishing_homotopy():
    f0 = family_from_polynomials(["x1**2 + 1"], build_point(), 1, 2.0)
    f1 = family_from_polynomials(["x1**2 - 9"], build_point(), 1, 2.0)
    # the linear homotopy at tau = 1/2 is x^2 - 4, vanishing on the sphere
    with pytest.raises(VNEngineError, match="homotopy vanishes"):
        check_cobordism_invariance(f0, f1)


# --- twisted families ---------------------------------------------------------


def test_moebius_generator():
    fam = builtin_family("moebius-1")
    assert not fam.orientation_consistent
    klass = family_class(fam, ring="F2")
    assert klass.values == {"*": 1}


def test_untwisted_product_vanishes():
    klass = family_class(builtin_family("product-trivial-1"), ring="F2")
    assert klass.values == {"*": 0}


def test_moebius_product_t2():
    klass = family_class(builtin_family("moebius-prod-n", n=2), ring="F2")
    assert klass.values == {"**": 1}


def test_moebius_product_t3():
    klass = family_class(builtin_family("moebius-prod-n", n=3), ring="F2")
    assert klass.values == {"***": 1}


def test_identity_transitions_give_product():
    fam = builtin_family("product-trivial-1")
    assert fam.orientation_consistent
    assert fam.base.kind == "torus"


def test_moebius_rejects_integer_ring():
    with pytest.raises(VNEngineError, match="orientation"):
        family_class(builtin_family("moebius-1"), ring="Z")


def test_noninvertible_transition_rejected():
    with pytest.raises(CocycleError, match="invertible"):
        family_from_polynomials(
            ["x1", "1 - 2*b1"],
            build_cube(1),
            1,
            2.0,
            transitions={0: (np.zeros((1, 1)), np.eye(2))},
        )


def test_cocycle_violation_on_t2():
    # target transitions that do not commute: rotation-ish integer blocks
    b0 = np.array([[0.0, -1.0], [1.0, 0.0]])
    b1 = np.array([[1.0, 1.0], [0.0, 1.0]])
    comps = ["x1", "x2"]

    def build():
        return family_from_polynomials(
            comps,
            build_cube(2),
            2,
            2.0,
            transitions={0: (np.eye(2), b0), 1: (np.eye(2), b1)},
        )

    with pytest.raises(CocycleError, match="axes 0 and 1"):
        build()


def test_descent_mismatch_rejected():
    # the Moebius section does not descend through identity transitions
    with pytest.raises(CocycleError, match="descend"):
        family_from_polynomials(
            ["x1", "1 - 2*b1"],
            build_cube(1),
            1,
            2.0,
            transitions={0: (np.eye(1), np.eye(2))},
        )


def test_boundary_zero_blocks_family_count():
    # b1 - b1^2 descends through identity transitions but vanishes over both
    # base faces: the inductive condition fails
    fam = family_from_polynomials(
        ["x1", "b1 - b1**2"],
        build_cube(1),
        1,
        2.0,
        transitions={0: (np.eye(1), np.eye(2))},
    )
    with pytest.raises(VNEngineError, match="boundary"):
        family_class(fam, ring="F2")


def test_nowhere_zero_declaration_checked():
    fam = builtin_family("moebius-1")
    with pytest.raises(VNEngineError, match="zero-free"):
        family_class(fam, ring="F2", nowhere_zero=("*",))


def test_orientation_consistent_twist_allows_integer_ring():
    # minus-identity on a rank-2 target has positive determinant, so signed
    # counts descend; this section's pairing never vanishes, count 0 over Z
    fam = family_from_polynomials(
        ["1 - 2*b1", "x1*(1 - 2*b1) + 4*b1*(1 - b1)"],
        build_cube(1),
        1,
        2.0,
        transitions={0: (np.eye(1), -np.eye(2))},
        name="double-twist",
    )
    assert fam.orientation_consistent
    klass = family_class(fam, ring="Z")
    assert klass.ring == "Z"
    assert klass.values == {"*": 0}


# --- naturality ---------------------------------------------------------------


def test_pullback_degree_scales_parity():
    base = builtin_family("moebius-1")
    for k in (1, 2, 3):
        klass = family_class(pullback_circle_family(base, k), ring="F2")
        assert klass.values == {"*": k % 2}


# --- mod-2 reduction ----------------------------------------------------------


def test_mod2_reduction_matches_signed_count():
    for name in ("line-linear", "line-cubic", "planar-z2"):
        fam = builtin_family(name)
        z = count_point(fam, ring="Z").value
        f2 = count_point(fam, ring="F2").value
        assert f2 == z % 2


# --- expression grammar -------------------------------------------------------


def test_grammar_rejects_calls_and_names():
    with pytest.raises(ValueError):
        compile_polynomial("__import__('os')", 0, 1)
    with pytest.raises(ValueError):
        compile_polynomial("x1 + y", 0, 1)
    with pytest.raises(ValueError):
        compile_polynomial("x1**-1", 0, 1)


def test_grammar_evaluates_vectorized():
    fn = compile_polynomial("3*x1**2 - b1/2", 1, 1)
    b = np.array([[0.0], [1.0]])
    x = np.array([[2.0], [3.0]])
    np.testing.assert_allclose(fn(b, x), [12.0, 26.5])


def test_family_from_spec_round_trip():
    spec = {
        "base": {"kind": "cube", "n": 1},
        "fiber_dim": 1,
        "radius": 2.0,
        "components": ["x1", "1 - 2*b1"],
        "transitions": {"0": {"fiber": [[1]], "target": [[1, 0], [0, -1]]}},
    }
    fam = family_from_spec(spec, name="user-moebius")
    assert fam.base.kind == "torus"
    assert family_class(fam, ring="F2").values == {"*": 1}
