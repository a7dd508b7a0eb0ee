import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ksplit.report import ExtensionClash, SortMismatch
from ksplit.structures import (
    FunctionSymbol,
    KSetColoring,
    PartialMap,
    PredicateRelation,
    RelationSymbol,
    Signature,
    Structure,
    TupleRelation,
    closure,
    extend_map,
    generated_substructure,
    is_partial_isomorphism,
    qf_type_equal,
)

from conftest import atom_oracle, random_coloring, random_graph


def successor_structure(n=5):
    sig = Signature.one_sorted(functions={"s": 1, "zero": 0})
    elems = tuple(range(n))
    fns = {"s": {(x,): min(x + 1, n - 1) for x in elems}, "zero": {(): 0}}
    return Structure(sig, {"el": elems}, {}, fns)


def test_signature_rejects_duplicates_and_unknown_sorts():
    with pytest.raises(ValueError):
        Signature(("a",), (RelationSymbol("R", 1, ("a",)),), (FunctionSymbol("R", 1, ("a",), "a"),))
    with pytest.raises(ValueError):
        Signature(("a",), (RelationSymbol("R", 1, ("b",)),))


def test_structure_rejects_bad_tuples_and_partial_functions():
    sig = Signature.one_sorted({"R": 2})
    with pytest.raises(ValueError):
        Structure(sig, {"el": (0, 1)}, {"R": TupleRelation(2, [(0, 7)])})
    fsig = Signature.one_sorted(functions={"f": 1})
    with pytest.raises(ValueError):
        Structure(fsig, {"el": (0, 1)}, {}, {"f": {(0,): 1}})


def test_partial_map_must_be_injective():
    with pytest.raises(ValueError):
        PartialMap(((0, 1), (2, 1)))
    m = PartialMap(((0, 1), (1, 2)))
    assert m.inverse().as_dict() == {1: 0, 2: 1}


def test_closure_of_relational_seed_is_seed():
    S = random_graph(5, 0.4, 1)
    assert set(generated_substructure(S, {3}).elements()) == {3}
    assert closure(S, ()) == frozenset()


def test_closure_fires_constants_on_empty_seed():
    S = successor_structure(5)
    assert closure(S, ()) == frozenset(range(5))
    assert closure(S, {3}) == frozenset(range(5))


def test_full_universe_generates_itself():
    S = successor_structure(4)
    T = generated_substructure(S, S.elements())
    assert T.to_json() == S.to_json()


def test_extend_map_clash():
    S = successor_structure(5)
    with pytest.raises(ExtensionClash):
        extend_map(S, {3: 2})  # forces zero -> zero and 4 -> 3, then s(4)=4 -> s(3)=4 clash
    assert qf_type_equal(S, (3,), (3,))
    assert not qf_type_equal(S, (3,), (2,))


def test_swap_across_classes_is_not_partial_iso():
    # Equiv_2 on 4 points: {0,1} and {2,3} share a color, everything else is singleton
    col = {frozenset(s): i for i, s in enumerate(itertools.combinations(range(4), 2))}
    col[frozenset({2, 3})] = col[frozenset({0, 1})]
    S = Structure(Signature.one_sorted({"E": 4}), {"el": tuple(range(4))}, {"E": KSetColoring(2, col)})
    assert S.holds("E", (0, 1, 3, 2))
    assert is_partial_isomorphism(S, {0: 0, 1: 1, 2: 2, 3: 3})
    # swapping 1 and 2 sends the class {0,1},{2,3} to {0,2},{1,3}
    assert not is_partial_isomorphism(S, {0: 0, 1: 2, 2: 1, 3: 3})


def test_sort_mismatch():
    sig = Signature(("a", "b"), (RelationSymbol("R", 2, ("a", "b")),))
    S = Structure(sig, {"a": ("x",), "b": ("y",)}, {"R": TupleRelation(2, [("x", "y")])})
    with pytest.raises(SortMismatch):
        qf_type_equal(S, ("x",), ("y",))
    with pytest.raises(SortMismatch):
        qf_type_equal(S, ("x",), ())


def test_json_round_trip_is_byte_stable():
    for S in (random_graph(6, 0.3, 2), random_coloring(6, 2, 3, 5), successor_structure(4)):
        text = S.to_json()
        again = Structure.from_json(text)
        assert again.to_json() == text
        assert list(json.loads(text)) == sorted(json.loads(text))


def test_predicate_relation_matches_tuple_relation():
    S = random_graph(5, 0.5, 9)
    R = S.relations["R"]
    P = PredicateRelation(2, lambda x, y: R.holds((x, y)))
    assert P.atoms_within({0, 1, 2}) == R.atoms_within({0, 1, 2})
    params = frozenset({0, 1})
    assert P.local_key(params, [3, 4]) == R.local_key(params, [3, 4])


tuples = st.lists(st.integers(0, 5), min_size=1, max_size=3)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10_000), a=tuples, b=tuples, c=st.sets(st.integers(0, 5), max_size=3),
       kind=st.sampled_from(["graph", "ternary", "equiv2", "equiv3"]))
def test_qf_type_equal_matches_atom_oracle(seed, a, b, c, kind):
    if kind == "graph":
        S = random_graph(6, 0.4, seed)
    elif kind == "ternary":
        S = random_graph(6, 0.3, seed, arity=3)
    elif kind == "equiv2":
        S = random_coloring(6, 2, 2, seed)
    else:
        S = random_coloring(6, 3, 2, seed)
    b = (b + a)[: len(a)]
    expected = atom_oracle(S, c, a) == atom_oracle(S, c, b)
    assert qf_type_equal(S, a, b, c) == expected


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 3), c=st.sets(st.integers(0, 5), max_size=2), data=st.data())
def test_qf_type_equal_is_an_equivalence(seed, n, c, data):
    S = random_coloring(6, 2, 2, seed)
    trip = [tuple(data.draw(st.lists(st.integers(0, 5), min_size=n, max_size=n))) for _ in range(3)]
    x, y, z = trip
    assert qf_type_equal(S, x, x, c)
    assert qf_type_equal(S, x, y, c) == qf_type_equal(S, y, x, c)
    if qf_type_equal(S, x, y, c) and qf_type_equal(S, y, z, c):
        assert qf_type_equal(S, x, z, c)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10_000), perm=st.permutations(range(5)), size=st.integers(0, 5))
def test_partial_iso_inverse(seed, perm, size):
    S = random_graph(5, 0.4, seed)
    m = {i: perm[i] for i in range(size)}
    if is_partial_isomorphism(S, m):
        assert is_partial_isomorphism(S, {v: k for k, v in m.items()})


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 7), s=st.sets(st.integers(0, 6), max_size=3), t=st.sets(st.integers(0, 6), max_size=3))
def test_closure_idempotent_and_monotone(n, s, t):
    S = successor_structure(n)
    s = {x for x in s if x < n}
    t = {x for x in t if x < n}
    cs = closure(S, s)
    assert closure(S, cs) == cs
    assert cs <= closure(S, s | t)


def test_functional_type_equality_uses_generated_substructure():
    # f(0)=2, f(1)=3, f(2)=2, f(3)=3; P holds of 2 only
    sig = Signature(("el",), (RelationSymbol("P", 1, ("el",)),), (FunctionSymbol("f", 1, ("el",), "el"),))
    f = {(0,): 2, (1,): 3, (2,): 2, (3,): 3}
    S = Structure(sig, {"el": (0, 1, 2, 3)}, {"P": TupleRelation(1, [(2,)])}, {"f": f})
    # 0 and 1 agree on every atom in x alone, but f(x) separates them
    assert not qf_type_equal(S, (0,), (1,))
    assert qf_type_equal(S, (0,), (0,), {3})
