import numpy as np
import pytest

from famclass.fourman import (
    FourManifoldDescriptor,
    SO3Class,
    SpinCClass,
    b_plus,
    check_bplus_condition,
    connected_sum,
    descriptor_from_json,
    descriptor_to_json,
    euler_char,
    formal_dim_asd,
    formal_dim_sw,
    group_membership,
    homeo_invariants_match,
    standard_manifold,
)
from famclass.lattice import IntegerLattice, LatticeError, build_lattice


def k3():
    return standard_manifold("K3")


def s2s2():
    return standard_manifold("S2xS2")


def test_euler_char():
    assert euler_char(s2s2()) == 4
    assert euler_char(k3()) == 24
    t4ish = FourManifoldDescriptor(
        "T4-like", b1=4, lattice=build_lattice([{"type": "H", "count": 3}])
    )
    assert euler_char(t4ish) == 0


def test_formal_dim_sw_k3():
    assert formal_dim_sw(k3(), SpinCClass([0] * 22)) == 0


def test_formal_dim_sw_k3_sums():
    x = k3()
    for n in range(1, 9):
        x, _ = connected_sum(x, s2s2())
        assert formal_dim_sw(x, SpinCClass([0] * x.lattice.rank)) == -n


def test_formal_dim_sw_s2s2():
    assert formal_dim_sw(s2s2(), SpinCClass([0, 0])) == -2


def test_formal_dim_sw_rejects_noncharacteristic():
    cp2 = standard_manifold("CP2")
    with pytest.raises(LatticeError, match="characteristic"):
        formal_dim_sw(cp2, SpinCClass([0]))


def test_formal_dim_asd():
    x = FourManifoldDescriptor(
        "M0", b1=0,
        lattice=build_lattice([{"type": "diag", "entries": [1, 1, 1, -1, -1, -1]}]),
    )
    p = SO3Class(p1=-6, w2=[1, 1, 0, 0, 0, 0])
    assert formal_dim_asd(x, p) == 0
    # summing one CP2 # 2(-CP2) with the twisted line bundle drops d by 1
    y, q = connected_sum(x, standard_manifold("CP2+2(-CP2)"), p,
                         SO3Class(p1=-1, w2=[1, 1, 1]))
    assert formal_dim_asd(y, q) == -1


def test_formal_dim_asd_b1():
    x = FourManifoldDescriptor(
        "circle-like", b1=1,
        lattice=build_lattice([{"type": "diag", "entries": [-1]}]),
    )
    with pytest.warns(UserWarning, match="mod 4"):
        assert formal_dim_asd(x, SO3Class(p1=0, w2=[1])) == 0
    with pytest.raises(LatticeError, match="mod 4"):
        formal_dim_asd(x, SO3Class(p1=0, w2=[1]), strict=True)


def test_formal_dim_asd_needs_w2():
    with pytest.raises(LatticeError, match="nonzero w2"):
        formal_dim_asd(s2s2(), SO3Class(p1=-6, w2=[0, 0]))


def test_connected_sum_classes():
    x, c = connected_sum(k3(), s2s2(), SpinCClass([0] * 22), SpinCClass([0, 0]))
    assert c.c1 == (0,) * 24
    assert euler_char(x) == euler_char(k3()) + euler_char(s2s2()) - 2

    m0 = k3()
    t0 = standard_manifold("CP2+2(-CP2)")
    s0, s1 = SpinCClass([0] * 22), SpinCClass([1, 1, 1])
    y, c = connected_sum(m0, t0, s0, s1)
    v = c.vector()
    sq = int(v @ y.lattice.gram @ v)
    assert sq == 0 + (1 - 1 - 1)  # c1 squared drops by 1

    _, p = connected_sum(
        m0, t0, SO3Class(-6, [1, 1] + [0] * 20), SO3Class(-1, [1, 1, 1])
    )
    assert p.p1 == -7


def test_connected_sum_mixed_kinds_rejected():
    with pytest.raises(LatticeError, match="same kind"):
        connected_sum(k3(), s2s2(), SpinCClass([0] * 22), SO3Class(-1, [1, 1]))


def test_formal_dim_sum_identity_random():
    # d(s1 # s2) = d(s1) + d(s2) + 1, from chi and sign additivity
    rng = np.random.default_rng(17)
    pool = [k3(), s2s2(), standard_manifold("CP2+2(-CP2)")]
    classes = [
        SpinCClass([0] * 22),
        SpinCClass([0, 0]),
        SpinCClass([1, 1, 1]),
    ]
    for _ in range(20):
        i, j = rng.integers(3), rng.integers(3)
        x, cx = pool[i], classes[i]
        y, cy = pool[j], classes[j]
        z, cz = connected_sum(x, y, cx, cy)
        assert formal_dim_sw(z, cz) == formal_dim_sw(x, cx) + formal_dim_sw(y, cy) + 1


def _solve_characteristic_mod2(gram):
    """Small mod-2 solver for G v = diag(G); assumes odd determinant."""
    n = gram.shape[0]
    a = gram.copy() % 2
    b = np.diag(gram).copy() % 2
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i, col])
        a[[col, piv]] = a[[piv, col]]
        b[[col, piv]] = b[[piv, col]]
        for i in range(n):
            if i != col and a[i, col]:
                a[i] = (a[i] + a[col]) % 2
                b[i] = (b[i] + b[col]) % 2
    return b


def _random_unimodular_form(rng, max_rank=6):
    """U^T D U for diagonal +-1 blocks and a random small unimodular U;
    intersection forms of closed oriented 4-manifolds are unimodular, and
    that is exactly what makes the dimension formula integral."""
    n = int(rng.integers(1, max_rank + 1))
    d = np.diag(rng.choice([-1, 1], size=n)).astype(np.int64)
    u = np.eye(n, dtype=np.int64)
    for _ in range(2 * n):
        i, j = rng.integers(n), rng.integers(n)
        if i == j:
            continue
        shear = np.eye(n, dtype=np.int64)
        shear[i, j] = int(rng.integers(-2, 3))
        u = u @ shear
    return IntegerLattice(u.T @ d @ u)


def test_formal_dim_sw_integral_random():
    rng = np.random.default_rng(29)
    for _ in range(500):
        lat = _random_unimodular_form(rng)
        assert abs(lat.determinant()) == 1
        v = _solve_characteristic_mod2(lat.gram)
        x = FourManifoldDescriptor("rnd", b1=int(rng.integers(0, 3)), lattice=lat)
        dim = formal_dim_sw(x, SpinCClass(v.tolist()))  # must not raise
        assert isinstance(dim, int)


def test_group_membership_identity():
    x = k3()
    rep = group_membership(x, SpinCClass([0] * 22), np.eye(22, dtype=int))
    assert rep.preserves_class
    assert rep.preserves_homology_orientation
    assert rep.coefficient_ring == "Z"


def test_group_membership_reflection():
    x, _ = connected_sum(k3(), s2s2())
    m = np.eye(24, dtype=int)
    m[22:24, 22:24] = -np.eye(2, dtype=int)
    rep = group_membership(x, SpinCClass([0] * 24), m)
    assert rep.preserves_class
    assert not rep.preserves_homology_orientation
    assert rep.coefficient_ring == "F2"


def test_group_membership_moves_class():
    lat = build_lattice([{"type": "diag", "entries": [1, -1]}])
    x = FourManifoldDescriptor("pm", b1=0, lattice=lat)
    m = np.diag([-1, -1]).astype(int)
    rep = group_membership(x, SpinCClass([1, 1]), m)
    assert not rep.preserves_class


def test_membership_multiplicative():
    rng = np.random.default_rng(31)
    lat = build_lattice([{"type": "H", "count": 2}])
    x = FourManifoldDescriptor("2H", b1=0, lattice=lat)
    s = SpinCClass([0, 0, 0, 0])
    blocks = [np.eye(2, dtype=int), -np.eye(2, dtype=int),
              np.array([[0, 1], [1, 0]])]
    maps = []
    for b1 in blocks:
        for b2 in blocks:
            m = np.zeros((4, 4), dtype=int)
            m[:2, :2] = b1
            m[2:, 2:] = b2
            maps.append(m)
    for _ in range(40):
        a, b = maps[rng.integers(len(maps))], maps[rng.integers(len(maps))]
        ra, rb = group_membership(x, s, a), group_membership(x, s, b)
        rab = group_membership(x, s, a @ b)
        assert rab.preserves_class == (ra.preserves_class and rb.preserves_class)
        assert rab.preserves_homology_orientation == (
            ra.preserves_homology_orientation == rb.preserves_homology_orientation
        )


def test_homeo_invariants_dissolve_family():
    for n in range(1, 5):
        x = k3()
        for _ in range(n):
            x, _ = connected_sum(x, standard_manifold("CP2+2(-CP2)"))
        y = FourManifoldDescriptor(
            "dissolved", b1=0,
            lattice=build_lattice(
                [{"type": "diag", "entries": [1] * (n + 3) + [-1] * (2 * n + 19)}]
            ),
        )
        match, report = homeo_invariants_match(x, y)
        assert match, report


def test_homeo_invariants_parity_differs():
    y = FourManifoldDescriptor(
        "odd-k3-candidate", b1=0,
        lattice=build_lattice([{"type": "diag", "entries": [1] * 3 + [-1] * 19}]),
    )
    match, report = homeo_invariants_match(k3(), y)
    assert not match
    assert report["parity"] == ("even", "odd")


def test_homeo_invariants_reflexive():
    assert homeo_invariants_match(k3(), k3())[0]


def test_check_bplus():
    x = k3()
    for _ in range(2):
        x, _ = connected_sum(x, s2s2())
    assert check_bplus_condition(x, 2)  # b+ = 5 >= 4
    assert not check_bplus_condition(s2s2(), 0)  # b+ = 1 < 2
    assert check_bplus_condition(k3(), 1)  # 3 >= 3


def test_descriptor_json_round_trip():
    x = k3()
    y = descriptor_from_json(descriptor_to_json(x))
    assert y.name == x.name and y.b1 == x.b1
    assert np.array_equal(y.lattice.gram, x.lattice.gram)
    assert b_plus(y) == 3
