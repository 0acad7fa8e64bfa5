import itertools

import pytest
from hypothesis import given, strategies as st

import oracles
from condsheaf.boolean_algebra import make_algebra
from condsheaf.category_f import FObject, Subobject, bounded_universe, terminal_object
from condsheaf.errors import SizeGuardError, ValidationError
from condsheaf.sheaf import sheaf_from_stalks
from condsheaf.subobject_lattice import (
    SubLattice, enumerate_sublattice, lattice_size, sublattice_report, verify_boolean_algebra,
)

AB = make_algebra(["p", "q"])
X21 = FObject(AB.one, sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}))
LAT = SubLattice(X21)


def sub(support, **stalks):
    return Subobject.make(X21, support, stalks)


def as_oracle(s: Subobject):
    alg = s.ambient.algebra
    b = frozenset(alg.atoms[i] for i, _ in s.stalks)
    return b, frozenset((alg.atoms[i], frozenset(v)) for i, v in s.stalks)


ORACLE_ELEMENTS = oracles.sub_elements(frozenset(["p", "q"]), {"p": ["x1", "x2"], "q": ["y1"]})


# -- enumeration -------------------------------------------------------------------


def test_sizes():
    assert len(LAT) == 8
    assert len(SubLattice(terminal_object(AB))) == 4
    assert len(SubLattice(FObject(AB.zero, X21.carrier))) == 1


def test_elements_match_oracle():
    assert {as_oracle(s) for s in LAT} == set(ORACLE_ELEMENTS)


def test_bounds():
    assert LAT.bottom == Subobject(X21, 0, ())
    assert LAT.top == sub("1", p=["x1", "x2"], q=["y1"])


@pytest.mark.parametrize("sizes", [(1,), (2,), (3,), (1, 1), (2, 1), (2, 2), (3, 1), (1, 1, 1), (2, 1, 2)])
def test_cardinality_law(sizes):
    alg = make_algebra(["p", "q", "r"][: len(sizes)])
    X = sheaf_from_stalks(alg, {i: [f"v{j}" for j in range(k)] for i, k in enumerate(sizes)})
    for s in alg.masks:
        obj = FObject(alg.elem(s), X)
        expected = 1
        for i, k in enumerate(sizes):
            if (s >> i) & 1:
                expected *= 2 ** k
        assert len(SubLattice(obj)) == expected == lattice_size(obj)


def test_size_guard():
    with pytest.raises(SizeGuardError):
        SubLattice(X21, limit=4)


def test_enumeration_matches_monic_images():
    uni = [(frozenset(AB.atoms[i] for i in W.atoms), {AB.atoms[i]: list(W.stalk(i)) for i in AB.atom_indices})
           for W in bounded_universe(AB, 2)]
    found = oracles.subobjects_via_monics(frozenset(["p", "q"]), {"p": ["x1", "x2"], "q": ["y1"]}, uni)
    assert found == {as_oracle(s) for s in LAT}


# -- join ------------------------------------------------------------------------------


def test_join_of_disjoint_pieces():
    assert LAT.join([sub("p", p=["x1"]), sub("q", q=["y1"])]) == sub("1", p=["x1"], q=["y1"])


def test_join_is_idempotent_and_bottom_neutral():
    s = sub("p", p=["x2"])
    assert LAT.join([s, s]) == s
    assert LAT.join([LAT.bottom, s]) == s


def test_empty_join_rejected():
    with pytest.raises(ValidationError):
        LAT.join([])
    with pytest.raises(ValidationError):
        LAT.meet([])


def test_binary_joins_and_meets_match_oracles():
    for s, t in itertools.product(LAT, repeat=2):
        assert as_oracle(LAT.join([s, t])) == oracles.lub_brute(ORACLE_ELEMENTS, [as_oracle(s), as_oracle(t)])
        assert as_oracle(LAT.meet([s, t])) == oracles.glb_brute(ORACLE_ELEMENTS, [as_oracle(s), as_oracle(t)])


def test_atoms_only_join_equals_full_construction():
    X = FObject(AB.one, sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1", "y2"]}))
    lat = SubLattice(X)
    for fam in itertools.combinations(lat.elements, 2):
        a1, full = lat.join_components(fam)
        a2, atoms = lat.join_components(fam, atoms_only=True)
        assert a1 == a2
        assert lat._from_components(a1, full) == lat._from_components(a2, atoms)
        # every component below the support is the set of amalgamations of atom picks
        joined = lat._from_components(a1, full)
        for c, comp in full.items():
            assert comp == joined.component(c)


def test_join_extension_does_not_change_identity():
    fam = [sub("p", p=["x1"]), sub("p", p=["x2"])]
    joined = LAT.join(fam)
    ext = LAT.join_extension(fam)
    for c in AB.masks:
        if c & ~joined.support == 0:
            assert ext[c] == joined.component(c)
    # above the support the extension pads with the ambient data
    assert ext[AB.top] == frozenset(X21.carrier.component(AB.top))


# -- meet -------------------------------------------------------------------------------


def test_meet_shrinks_support():
    assert LAT.meet([sub("1", p=["x1"], q=["y1"]), sub("1", p=["x2"], q=["y1"])]) == sub("q", q=["y1"])


def test_meet_with_top_and_disjoint_supports():
    s = sub("1", p=["x2"], q=["y1"])
    assert LAT.meet([s, LAT.top]) == s
    assert LAT.meet([sub("p", p=["x1"]), sub("q", q=["y1"])]) == LAT.bottom


# -- complement --------------------------------------------------------------------------


def test_complement_examples():
    assert LAT.complement(sub("p", p=["x1"])) == sub("1", p=["x2"], q=["y1"])
    assert LAT.complement(LAT.bottom) == LAT.top
    assert LAT.complement(LAT.top) == LAT.bottom


def test_direct_complement_agrees_with_join_definition():
    X = FObject(AB.one, sheaf_from_stalks(AB, {"p": ["x1", "x2", "x3"], "q": ["y1", "y2"]}))
    lat = SubLattice(X)
    for s in lat:
        c = lat.complement(s)
        assert c == lat.direct_complement(s)
        assert lat.meet([s, c]) == lat.bottom and lat.join([s, c]) == lat.top


# -- Boolean algebra verification ---------------------------------------------------------


def test_eight_element_lattice_is_boolean():
    rep = verify_boolean_algebra(LAT)
    assert rep.passed
    assert sorted(rep.atoms) == ["p:p={x1}", "p:p={x2}", "q:q={y1}"]
    step2 = next(c for c in rep.checks if c.name == "step2-identity")
    assert step2.cases == 8 ** 3


def test_terminal_lattice_is_the_algebra():
    for n in range(4):
        alg = make_algebra(["p", "q", "r"][:n])
        lat = SubLattice(terminal_object(alg))
        assert verify_boolean_algebra(lat).passed
        assert sorted(s.support for s in lat) == sorted(alg.masks)
        for s, t in itertools.product(lat, repeat=2):
            assert lat.join([s, t]).support == s.support | t.support
            assert lat.meet([s, t]).support == s.support & t.support
            assert s.leq(t) == (s.support & ~t.support == 0)


def test_single_point_lattice():
    lat = SubLattice(FObject(AB.zero, X21.carrier))
    rep = verify_boolean_algebra(lat)
    assert rep.passed and rep.size == 1 and rep.atoms == []


def test_report_as_dict_is_complete():
    d = verify_boolean_algebra(LAT).as_dict()
    names = [c["name"] for c in d["checks"]]
    assert names == ["cardinality", "partial-order", "bounds", "join-is-lub", "meet-is-glb", "closure",
                     "commutativity", "idempotence", "absorption", "associativity", "distributivity",
                     "step2-identity", "complement", "double-complement-de-morgan", "completeness",
                     "atomic-powerset"]
    assert d["passed"] and d["size"] == d["expected_size"] == 8


def test_a_broken_meet_is_reported():
    lat = SubLattice(X21)
    lat.meet = lambda fam: lat.bottom  # always bottom: not a glb
    rep = verify_boolean_algebra(lat)
    bad = {c.name for c in rep.checks if not c.passed}
    assert "meet-is-glb" in bad
    assert all(c.counterexample for c in rep.checks if not c.passed)


def test_sublattice_report_small():
    r = sublattice_report(1, 2)
    assert r["passed"] and r["objects_checked"] == 1 + 1 + 2
    assert r["lattice_sizes"] == {"1": 2, "2": 1, "4": 1}


@given(st.lists(st.integers(1, 2), min_size=1, max_size=3), st.data())
def test_random_families_have_correct_bounds(sizes, data):
    alg = make_algebra(["p", "q", "r"][: len(sizes)])
    X = sheaf_from_stalks(alg, {i: [f"v{j}" for j in range(k)] for i, k in enumerate(sizes)})
    lat = SubLattice(FObject(alg.one, X))
    fam = data.draw(st.lists(st.sampled_from(lat.elements), min_size=1, max_size=5))
    assert lat.join(fam) == lat.brute_join(fam)
    assert lat.meet(fam) == lat.brute_meet(fam)


def test_dot_output_shape():
    dot = LAT.to_dot()
    assert dot.startswith("digraph Sub {")
    # the Hasse diagram of a 3-atom powerset has 12 edges
    assert dot.count("->") == 12 == len(LAT.covers())
    assert '"p:p={x1}"' in dot


def test_enumerate_sublattice_alias():
    assert enumerate_sublattice(X21).elements == LAT.elements
