import itertools

import pytest
from hypothesis import given, strategies as st

from condsheaf.boolean_algebra import make_algebra, partition_masks
from condsheaf.category_f import FObject
from condsheaf.conditional_set import (
    CondSet, NotSurjective, check_condset, check_cond_function, conditional_empty_set,
    conditional_inclusion, conditional_product, from_sheaf, identity_graph, roundtrip_report,
    stalk_models, to_sheaf, validate_cond_function, validate_condset,
)
from condsheaf.errors import AxiomError, ValidationError
from condsheaf.sheaf import (
    ExtensionalSheaf, _fill_forced_maps, check_sheaf, isomorphic, sheaf_equal, sheaf_from_stalks, terminal_sheaf,
)
from condsheaf.subobject_lattice import SubLattice

AB = make_algebra(["p", "q"])
P, Q, ONE = 1, 2, 3


def basic_data():
    comps = {0: ["*"], P: ["x1", "x2"], Q: ["y1"], ONE: ["x1y1", "x2y1"]}
    gammas = {0: {"x1y1": "*", "x2y1": "*"}, P: {"x1y1": "x1", "x2y1": "x2"},
              Q: {"x1y1": "y1", "x2y1": "y1"}, ONE: {"x1y1": "x1y1", "x2y1": "x2y1"}}
    return comps, gammas


def axioms(comps, gammas, alg=AB):
    problems, violations = check_condset(alg, comps, gammas)
    assert problems == []
    return {v.axiom for v in violations}


# -- validate_condset ------------------------------------------------------------


def test_projection_example_is_valid():
    comps, gammas = basic_data()
    C = validate_condset(AB, comps, gammas)
    assert C.X1 == ("x1y1", "x2y1")


def test_constant_gamma_p_is_not_surjective():
    comps, gammas = basic_data()
    gammas[P] = {"x1y1": "x1", "x2y1": "x1"}
    problems, violations = check_condset(AB, comps, gammas)
    surj = [v for v in violations if v.axiom == "surjectivity"]
    assert surj and surj[0].witness == {"c": "p", "missing": ["x2"]}


def test_three_elements_over_two_by_one_break_uniqueness():
    comps = {0: ["*"], P: ["x1", "x2"], Q: ["y1"], ONE: ["a", "b", "c"]}
    gammas = {0: dict.fromkeys("abc", "*"), P: {"a": "x1", "b": "x2", "c": "x1"},
              Q: dict.fromkeys("abc", "y1")}
    problems, violations = check_condset(AB, comps, gammas)
    uniq = [v for v in violations if v.axiom == "iv-stability-uniqueness"]
    assert len(uniq) == 1
    assert uniq[0].witness["partition"] == ["p", "q"]
    assert uniq[0].witness["elements"] == ["a", "c"]


def test_axiom_i_singleton():
    comps, gammas = basic_data()
    comps[0] = ["*", "o"]
    assert "i-singleton" in axioms(comps, gammas)


def test_axiom_ii_identity():
    comps, gammas = basic_data()
    gammas[ONE] = {"x1y1": "x2y1", "x2y1": "x1y1"}
    assert "ii-identity" in axioms(comps, gammas)


def test_axiom_iii_consistency():
    A = make_algebra(["p", "q", "r"])
    C = from_sheaf(sheaf_from_stalks(A, {"p": ["x1", "x2"], "q": ["y1"], "r": ["z1"]}))
    comps = dict(C.components)
    gammas = {c: dict(g) for c, g in C.gammas.items()}
    pq = A.mask_of("p|q")
    # gamma_{p|q} now merges elements that gamma_p separates
    gammas[pq] = {x: ("x1", "y1") for x in C.X1}
    assert "iii-consistency" in axioms(comps, gammas, A)


def test_gamma_top_may_be_omitted():
    comps, gammas = basic_data()
    del gammas[ONE]
    assert validate_condset(AB, comps, gammas).gammas[ONE] == {"x1y1": "x1y1", "x2y1": "x2y1"}


def test_validated_condset_is_stable_over_every_partition():
    comps, gammas = basic_data()
    C = validate_condset(AB, comps, gammas)
    for parts in partition_masks(ONE):
        for fam in itertools.product(*(C.components[p] for p in parts)):
            hits = [x for x in C.X1 if all(C.gammas[p][x] == f for p, f in zip(parts, fam))]
            assert len(hits) == 1


# -- to_sheaf / from_sheaf ----------------------------------------------------------


def test_to_sheaf_normalizes_to_the_stalks():
    C = validate_condset(AB, *basic_data())
    X = to_sheaf(C)
    assert X.is_surjective()
    N = X.normalize()
    assert N.stalk_sizes() == {"p": 2, "q": 1}
    assert set(N.stalk(0)) == {"x1", "x2"} and set(N.stalk(1)) == {"y1"}
    assert X.restrict("x2y1", ONE, P) == "x2"


def test_conditional_empty_set():
    E = conditional_empty_set(AB)
    X = to_sheaf(E)
    assert X.algebra.degenerate and X.components == {0: ("*",)}


def test_terminal_condset_gives_terminal_sheaf():
    T = from_sheaf(terminal_sheaf(AB))
    assert all(len(v) == 1 for v in T.components.values())
    assert sheaf_equal(to_sheaf(T), terminal_sheaf(AB))


def test_from_sheaf_of_stalk_form_is_the_projection_example():
    X = sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]})
    C = from_sheaf(X)
    assert C.X1 == (("x1", "y1"), ("x2", "y1"))
    assert C.gammas[P] == {("x1", "y1"): ("x1",), ("x2", "y1"): ("x2",)}


def test_from_sheaf_rejects_non_surjective():
    # a sheaf with an empty component: restriction onto p cannot be onto
    comps = {0: ("*",), P: ("u",), Q: (), ONE: ()}
    maps = {(ONE, P): {}, (ONE, Q): {}}
    X = ExtensionalSheaf(AB, comps, _fill_forced_maps(AB, comps, maps))
    assert check_sheaf(AB, comps, maps) == ([], [])
    with pytest.raises(NotSurjective) as exc:
        from_sheaf(X)
    w = exc.value.witness
    assert w == {"to": "0", "from": "q", "missed": "*"}
    frm, to = AB.mask_of(w["from"]), AB.mask_of(w["to"])
    assert w["missed"] not in {X.restrict(x, frm, to) for x in X.component(frm)}


def test_roundtrip_report_small():
    r = roundtrip_report(2, 2)
    assert r["passed"] and r["models_checked"] == 1 + 2 + 4


@given(st.integers(0, 3), st.data())
def test_roundtrip_through_relabeled_extensional_data(n, data):
    A = make_algebra(list("pqr"[:n]))
    sizes = data.draw(st.lists(st.integers(1, 3), min_size=n, max_size=n))
    X = sheaf_from_stalks(A, {i: [f"s{i}{j}" for j in range(k)] for i, k in enumerate(sizes)})
    # relabel every element of every component so no tuple structure survives
    E = X.to_extensional()
    name = {c: {x: f"e{c}_{k}" for k, x in enumerate(E.components[c])} for c in A.masks}
    comps = {c: [name[c][x] for x in E.components[c]] for c in A.masks}
    maps = {(b, a): {name[b][x]: name[a][y] for x, y in m.items()} for (b, a), m in E.maps.items()}
    R = ExtensionalSheaf(A, comps, maps)
    C = from_sheaf(R)
    S = to_sheaf(C)
    assert sheaf_equal(S, R)
    assert from_sheaf(S) == C
    assert isomorphic(S.normalize(), X)


@given(st.data())
def test_amalgamation_recipe_independent_of_filler(data):
    A = make_algebra(["p", "q", "r"])
    sizes = data.draw(st.lists(st.integers(1, 3), min_size=3, max_size=3))
    C = from_sheaf(sheaf_from_stalks(A, {i: [f"v{j}" for j in range(k)] for i, k in enumerate(sizes)}))
    base = data.draw(st.sampled_from([m for m in A.masks if m not in (0, A.top)]))
    parts = data.draw(st.sampled_from(list(partition_masks(base))))
    fam = {p: data.draw(st.sampled_from(C.components[p])) for p in parts}
    rest = A.top & ~base
    results = {C.amalgamate(base, fam, filler=z) for z in C.components[rest]}
    assert len(results) == 1
    assert results == {C.amalgamate(base, fam)}


# -- inclusion and product -------------------------------------------------------------


def condset_of_subobject(s):
    return from_sheaf(s.as_sheaf())


def test_empty_set_included_in_everything():
    Y = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}))
    assert conditional_inclusion(conditional_empty_set(AB), Y)


def test_inclusion_of_p_part():
    Ysh = sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]})
    Y = from_sheaf(Ysh)
    Xp = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1"], "q": ["y1"]}).restricted(P))
    assert conditional_inclusion(Xp, Y)
    for c in (0, P):
        assert set(to_sheaf(Xp).component(c)) <= set(Ysh.component(c))
    assert not conditional_inclusion(Y, from_sheaf(Ysh.restricted(P)))


def test_inclusion_is_a_partial_order_and_matches_sub_order():
    Ysh = sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]})
    lat = SubLattice(FObject(AB.one, Ysh))
    sets = [condset_of_subobject(s) for s in lat]
    for (s, X), (t, Z) in itertools.product(zip(lat, sets), repeat=2):
        inc = conditional_inclusion(X, Z)
        assert inc == s.leq(t)
        if inc and conditional_inclusion(Z, X):
            assert X == Z
    for X, Z, W in itertools.product(sets, repeat=3):
        if conditional_inclusion(X, Z) and conditional_inclusion(Z, W):
            assert conditional_inclusion(X, W)


def test_product_with_terminal_is_isomorphic():
    X = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}))
    T = from_sheaf(terminal_sheaf(AB))
    Pr = conditional_product([X, T])
    assert {c: len(v) for c, v in Pr.components.items()} == {c: len(v) for c, v in X.components.items()}
    problems, violations = check_condset(Pr.algebra, Pr.components, Pr.gammas)
    assert problems == [] and violations == []


def test_product_of_disjoint_supports_is_empty_set():
    X = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}).restricted(P))
    Y = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1"], "q": ["y1"]}).restricted(Q))
    Pr = conditional_product([X, Y])
    assert Pr.algebra.top == 0
    assert Pr == conditional_empty_set(AB)


def test_square_of_two_element_set_has_four():
    X = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}))
    assert len(conditional_product([X, X]).X1) == 4


def test_empty_product_rejected():
    with pytest.raises(ValidationError):
        conditional_product([])


@given(st.lists(st.tuples(st.integers(0, 7), st.integers(1, 2), st.integers(1, 2), st.integers(1, 2)),
                min_size=1, max_size=3))
def test_product_support_is_meet(specs):
    A = make_algebra(["p", "q", "r"])
    family = []
    meet = A.top
    for support, *sizes in specs:
        X = sheaf_from_stalks(A, {i: [f"v{j}" for j in range(k)] for i, k in enumerate(sizes)})
        family.append(from_sheaf(X.restricted(support)))
        meet &= support
    Pr = conditional_product(family)
    assert Pr.algebra.top == meet
    problems, violations = check_condset(Pr.algebra, Pr.components, Pr.gammas)
    assert problems == [] and violations == []


# -- conditional functions ----------------------------------------------------------------


def test_identity_graph_is_a_function():
    X = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}))
    F = validate_cond_function(identity_graph(X), X, X, AB.one)
    assert F.f(P) == {("x1",): ("x1",), ("x2",): ("x2",)}


def test_missing_pair_is_totality_violation():
    X = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}))
    G = identity_graph(X)
    G[P] = {(("x1",), ("x1",))}
    _, violations = check_cond_function(G, X, X, AB.one)
    tot = [v for v in violations if v.axiom == "totality"]
    assert tot and tot[0].witness["c"] == "p"


def test_two_images_is_functionality_violation():
    X = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}))
    G = identity_graph(X)
    G[P] = G[P] | {(("x1",), ("x2",))}
    with pytest.raises(AxiomError) as exc:
        validate_cond_function(G, X, X, AB.one)
    fun = [v for v in exc.value.violations if v.axiom == "functionality"]
    assert fun and fun[0].witness["c"] == "p"


def test_domain_is_checked_only_below_d():
    X = from_sheaf(sheaf_from_stalks(AB, {"p": ["x1", "x2"], "q": ["y1"]}))
    G = identity_graph(X)
    G[Q] = set()
    assert check_cond_function(G, X, X, P) == ([], [])
    assert check_cond_function(G, X, X, AB.one)[1]
