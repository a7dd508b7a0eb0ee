import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ksplit.detectors import PartitionedType, k_splits_over
from ksplit.gallery import (
    amalgamate_equiv,
    build_equiv_witness,
    build_hypergraph_witness,
    build_ipk_witness,
    build_K_config,
    equiv_structure,
    extend_equiv_random,
    find_order_property,
    free_amalgam,
    ipk_pattern,
    nonsplitting_base_equiv,
    random_equiv_k,
    random_hypergraph,
    validate_equiv_k0,
    validate_tk,
)
from ksplit.report import BudgetExceeded, NotSubstructure
from ksplit.structures import Signature, Structure, TupleRelation, qf_type_equal


def equality_pattern(a):
    return tuple(tuple(x == y for y in a) for x in a)


# -- Equiv_k ---------------------------------------------------------------------


def test_single_color_on_k_elements_validates():
    S = equiv_structure(3, range(3), {frozenset(range(3)): 0})
    assert validate_equiv_k0(S)


def test_repeating_tuple_in_E_fails_validation():
    tuples = {(0, 1, 0, 1), (1, 0, 1, 0), (0, 1, 1, 0), (1, 0, 0, 1), (0, 0, 0, 0)}
    S = Structure(Signature.one_sorted({"E": 4}), {"el": (0, 1)}, {"E": TupleRelation(4, tuples)})
    r = validate_equiv_k0(S)
    assert not r and r.first_violation["reason"].startswith("reflexivity")


def test_uncolored_kset_fails_validation():
    S = equiv_structure(2, range(3), {frozenset({0, 1}): 0, frozenset({0, 2}): 0})
    assert not validate_equiv_k0(S)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(2, 3), st.integers(1, 4), st.integers(0, 10**6))
def test_random_equiv_validates_on_both_paths(n, k, colors, seed):
    if n < k:
        return
    S = random_equiv_k(n, k, colors, seed)
    assert validate_equiv_k0(S).details["path"] == "coloring"
    expanded = Structure(S.signature, S.universe, {"E": TupleRelation(2 * k, S.relations["E"].tuples())})
    assert validate_equiv_k0(expanded).details["path"] == "tuples"


def test_one_color_relates_every_injective_pair():
    S = random_equiv_k(4, 2, 1, 9)
    for x, y in itertools.product(itertools.permutations(range(4), 2), repeat=2):
        assert S.holds("E", x + y)


def test_random_equiv_deterministic():
    assert random_equiv_k(7, 2, 3, 5).to_json() == random_equiv_k(7, 2, 3, 5).to_json()


def split_model(base_colors, extra):
    """Equiv_2 model on 0..2 plus the listed extra elements, each new pair colored per `extra`."""
    elems = [0, 1, 2] + sorted({x for s in extra for x in s} - {0, 1, 2})
    colors = dict(base_colors)
    colors.update({frozenset(s): c for s, c in extra.items()})
    for c in itertools.combinations(elems, 2):
        colors.setdefault(frozenset(c), ("solo", c))
    return equiv_structure(2, elems, colors)


BASE = {frozenset({0, 1}): "p", frozenset({0, 2}): "q", frozenset({1, 2}): "r"}


def test_free_amalgam_of_identical_structures_is_identity():
    S0 = equiv_structure(2, range(3), BASE)
    A = free_amalgam(S0, S0, S0)
    assert A.to_json() == S0.to_json()


def test_free_amalgam_adds_only_reflexive_instances():
    S0 = equiv_structure(2, range(3), BASE)
    S1 = split_model(BASE, {(0, 3): "p"})
    S2 = split_model(BASE, {(1, 4): "q"})
    A = free_amalgam(S0, S1, S2)
    assert validate_equiv_k0(A)
    assert A.holds("E", (0, 3, 0, 1)) and A.holds("E", (1, 4, 0, 2))
    assert not A.holds("E", (3, 4, 0, 1)) and A.holds("E", (3, 4, 4, 3))


def test_free_amalgam_extending_one_class_twice_is_not_transitive():
    S0 = equiv_structure(2, range(3), BASE)
    S1 = split_model(BASE, {(0, 3): "p"})
    S2 = split_model(BASE, {(1, 4): "p"})
    assert not validate_equiv_k0(free_amalgam(S0, S1, S2))
    merged = amalgamate_equiv(S0, S1, S2)
    assert validate_equiv_k0(merged) and merged.holds("E", (0, 3, 1, 4))


def test_amalgam_rejects_non_substructure():
    S0 = equiv_structure(2, range(3), BASE)
    bad = split_model({frozenset({0, 1}): "q", frozenset({0, 2}): "q"}, {(0, 3): "q"})
    with pytest.raises(NotSubstructure):
        free_amalgam(S0, bad, S0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_random_amalgams_validate(s1, s2):
    S0 = equiv_structure(2, range(3), BASE)
    S1, _ = extend_equiv_random(S0, ["x", "y"], s1)
    S2, _ = extend_equiv_random(S0, ["z"], s2)
    # shift S2's new element away from S1's
    cols = {frozenset(7 if x == 3 else x for x in s): c for s, c in S2.relations["E"].colors.items()}
    S2 = equiv_structure(2, [0, 1, 2, 7], cols)
    assert validate_equiv_k0(amalgamate_equiv(S0, S1, S2))


# -- witnesses -------------------------------------------------------------------


def test_equiv_witness_small():
    S, t = build_equiv_witness(2, 1)
    assert len(S) == 6
    assert S.holds("E", (t["a0"], t["b0"], t["a1"], t["c0"]))
    assert not S.holds("E", (t["a0"], t["b'0"], t["a1"], t["c'0"]))


@pytest.mark.parametrize("k,N", [(k, N) for k in (2, 3, 4) for N in (1, 3, 6)])
def test_equiv_witness_validates(k, N):
    S, _ = build_equiv_witness(k, N)
    assert validate_equiv_k0(S)


@pytest.mark.parametrize("k", [2, 3])
def test_full_arity_partition_never_splits(k):
    # 2k blocks: every atom with a parameter misses some block
    S, t = build_equiv_witness(k, 2)
    blocks = [(t[f"a{j}"],) for j in range(2 * k - 2)] + [(t["b0"],), (t["c0"],)]
    B = [t[n] for n in ("b'0", "c'0", "b1", "c1", "b'1", "c'1")]
    assert k_splits_over(PartitionedType(S, blocks, B), (), 2) is None


def test_nonsplitting_base_without_relations_is_empty():
    S = equiv_structure(2, range(6), {frozenset(c): c for c in itertools.combinations(range(6), 2)})
    assert nonsplitting_base_equiv(S, [(0,), (1,), (2,)], [3, 4, 5]) == frozenset()


@pytest.mark.parametrize("seed", range(4))
def test_nonsplitting_base_size_bound_and_no_split(seed):
    S, t = build_equiv_witness(2, 2)
    S, t = extend_equiv_random(S, ["a2"], seed)
    blocks = [(t["a0"],), (t["a1"],), (t["a2"],)]
    B = [x for x in S.elements() if (x,) not in blocks]
    C = nonsplitting_base_equiv(S, blocks, B)
    assert len(C) <= 2 * 3
    assert k_splits_over(PartitionedType(S, blocks, B), C, 2) is None


@pytest.mark.parametrize("n", range(1, 5))
def test_ipk_witness_realizes_every_pattern(n):
    for mask in range(1 << n):
        X = {(i,) for i in range(n) if mask >> i & 1}
        S, _ = build_ipk_witness(2, n, X)
        assert ipk_pattern(S, 2, n) == X


def test_ipk_example_and_k3():
    S, t = build_ipk_witness(2, 3, [0, 2])
    a = (t["a0"], t["a1"])
    assert [S.holds("E", a + (t[f"b0_{i}"], t["c"])) for i in range(3)] == [True, False, True]
    X = {(0, 1), (1, 1)}
    S3, _ = build_ipk_witness(3, 2, X)
    assert ipk_pattern(S3, 3, 2) == X
    with pytest.raises(ValueError):
        build_ipk_witness(2, 2, [5])


def test_hypergraph_witness_and_random():
    S, t = build_hypergraph_witness(2, 2)
    a0 = t["a0"]
    assert {y for y in S.elements() if S.holds("R", (a0, y))} == {t["b0"], t["b1"]}
    assert not list(random_hypergraph(6, 3, 0.0, 1).relations["R"].tuples())
    H = random_hypergraph(6, 3, 0.5, 4)
    assert H.to_json() == random_hypergraph(6, 3, 0.5, 4).to_json()
    for e in H.relations["R"].tuples():
        assert all(H.holds("R", p) for p in itertools.permutations(e))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_hypergraph_splits_at_every_cut(k):
    S, t = build_hypergraph_witness(k, 4)
    blocks = [(t[f"a{j}"],) for j in range(k - 1)]
    B = [t[f"{x}{i}"] for i in range(4) for x in ("b", "b'")]
    pt = PartitionedType(S, blocks, B)
    for beta in range(4):
        C = [t[f"{x}{i}"] for i in range(beta) for x in ("b", "b'")]
        w = k_splits_over(pt, C, 1)
        assert w.b == (t[f"b{beta}"],) and S.holds("R", tuple(x for (x,) in blocks) + w.b)


# -- qf types in Equiv_k -----------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 3))
def test_short_tuples_typed_by_equality(seed, k):
    S = random_equiv_k(5, k, 2, seed)
    tuples = list(itertools.product(range(5), repeat=k))[::7]
    for a, b in itertools.combinations(tuples, 2):
        assert qf_type_equal(S, a, b) == (equality_pattern(a) == equality_pattern(b))


def test_overlapping_ksets_separate_longer_tuples():
    # k + 1 < 2k elements already carry a non-trivial E instance through a shared point
    S = equiv_structure(2, range(4), {frozenset({0, 1}): 0, frozenset({0, 2}): 0, frozenset({0, 3}): 1,
                                      frozenset({1, 2}): 2, frozenset({1, 3}): 3, frozenset({2, 3}): 4})
    assert equality_pattern((0, 1, 2)) == equality_pattern((0, 1, 3))
    assert not qf_type_equal(S, (0, 1, 2), (0, 1, 3))


# -- T_k -------------------------------------------------------------------------


@pytest.mark.parametrize("k,ell", [(k, l) for k in (1, 2, 3) for l in (1, 3, 5)])
def test_K_config_validates(k, ell):
    S, _ = build_K_config(k, ell)
    assert validate_tk(S, k)


@pytest.mark.parametrize("k,ell", [(2, 3), (3, 2)])
def test_K_config_type_claims(k, ell):
    S, t = build_K_config(k, ell)
    a = [t[f"a{i}"] for i in range(1, k + 1)]
    for j in range(ell):
        prior = [t[f"{x}{m}"] for m in range(j) for x in "bc"]
        b, c = (t[f"b{j}"],), (t[f"c{j}"],)
        for drop in range(k):
            assert qf_type_equal(S, b, c, prior + a[:drop] + a[drop + 1:])
        assert not qf_type_equal(S, b, c, prior + a)


def test_tk_validator_catches_downward_closure():
    S, t = build_K_config(2, 2)
    d = S.to_dict()
    bad = [[t["b1"], t["a1"], t["a2"]]]
    d["relations"]["R"]["tuples"] = bad
    r = validate_tk(Structure.from_dict(d), 2)
    assert not r and r.first_violation["reason"] == "downward closure of R fails"


# -- order property --------------------------------------------------------------


def test_order_property_half_graph_and_edgeless():
    n = 3
    edges = [(i, n + j) for i in range(n) for j in range(n) if i < j]
    S = Structure(Signature.one_sorted({"R": 2}), {"el": tuple(range(2 * n))}, {"R": TupleRelation(2, edges)})
    w = find_order_property(S, "R", 3)
    assert w is not None
    assert all(S.holds("R", (g, h)) == (i < j) for i, (g,) in enumerate(w["g"]) for j, (h,) in enumerate(w["h"]))
    empty = Structure(S.signature, S.universe, {"R": TupleRelation(2, [])})
    assert find_order_property(empty, "R", 3) is None


@pytest.mark.parametrize("seed", range(3))
def test_no_long_half_graph_in_equiv(seed):
    S = random_equiv_k(6, 2, 2, seed)
    assert find_order_property(S, "E", 3) is None


def test_order_property_budget():
    S = random_equiv_k(6, 2, 2, 0)
    with pytest.raises(BudgetExceeded):
        find_order_property(S, "E", 3, budget=5)
