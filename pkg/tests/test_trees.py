import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ksplit.report import NotDownrightClosed
from ksplit.trees import (
    BOTTOM,
    DownrightGrid,
    FiniteTree,
    all_downright_closed,
    f_of_X,
    graph_of,
    is_downright_closed,
    meet,
    op2_quad_check,
    op2_quad_search,
    proper_prefix,
    verify_fX_claim,
    verify_lemma_A4,
    x_set,
    y_set,
    z_set,
)


def test_meet_and_prefix():
    assert meet((0, 1, 1), (0, 1, 0)) == (0, 1)
    assert meet((1,), (0,)) == ()
    assert proper_prefix((0,), (0, 1)) and not proper_prefix((0, 1), (0, 1))


def test_tree_sizes():
    t = FiniteTree(2, 3)
    assert len(t.leaves()) == 8 and len(t.nodes()) == 15
    assert FiniteTree(3, 0).leaves() == [()]
    with pytest.raises(ValueError):
        FiniteTree(0, 2)


def test_downright_closed_counts():
    # closed sets on an n-chain are staircase paths: binomial(2n, n)
    assert [len(all_downright_closed(range(n))) for n in range(5)] == [1, 2, 6, 20, 70]


def test_downright_violation():
    g = DownrightGrid(range(3), [(1, 1)])
    assert not is_downright_closed(g)
    assert is_downright_closed(DownrightGrid(range(3), [(1, 1), (1, 0), (2, 1), (2, 0)]))
    with pytest.raises(NotDownrightClosed):
        f_of_X(g)


def test_x_set_small_tree():
    t = FiniteTree(2, 2)
    assert x_set(t, (0, 0)) == {((1, 0), (1, 1))}
    assert x_set(t, (1, 1)) == frozenset()


def brute_sets(t, eta):
    """The three leaf relations written out directly from their membership conditions."""
    L = t.leaves()
    pairs = list(itertools.product(L, repeat=2))

    def lcp(s, u):
        n = 0
        while n < min(len(s), len(u)) and s[n] == u[n]:
            n += 1
        return n

    x = {(n, x) for n, x in pairs if eta < n < x and lcp(eta, n) < lcp(n, x)}
    y = {(n, x) for n, x in pairs if eta < n and (lcp(n, eta) < lcp(n, x) or n >= x)}
    z = {(n, x) for n, x in pairs if n >= x}
    return x, y, z


@pytest.mark.parametrize("b,d", [(2, 2), (2, 3), (3, 2)])
def test_sets_match_brute_force(b, d):
    t = FiniteTree(b, d)
    for eta in t.leaves():
        assert (x_set(t, eta), y_set(t, eta), z_set(t)) == brute_sets(t, eta)


@pytest.mark.parametrize("b,d", [(b, d) for b in (1, 2, 3) for d in (0, 1, 2, 3)])
def test_lemma_A4_exhaustive(b, d):
    r = verify_lemma_A4(FiniteTree(b, d))
    assert r and r.stats["leaves"] == b ** d


def test_fX_on_every_small_grid():
    for n in range(5):
        for g in all_downright_closed(range(n)):
            assert verify_fX_claim(g)


def test_fX_bottom_and_values():
    g = DownrightGrid(range(3), [(1, 0), (2, 0), (2, 1)])
    assert f_of_X(g) == {0: BOTTOM, 1: 0, 2: 1}


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-1, 4), min_size=1, max_size=5))
def test_graph_of_monotone_map_round_trips(vals):
    # a non-decreasing map into order U {BOTTOM} is recovered from its graph
    order = list(range(len(vals)))
    f = {}
    cur = -1
    for i, v in enumerate(vals):
        cur = max(cur, min(v, len(vals) - 1))
        f[i] = BOTTOM if cur < 0 else cur
    g = graph_of(order, f)
    assert is_downright_closed(g)
    assert f_of_X(g) == f


def test_op2_quads():
    assert op2_quad_search(FiniteTree(2, 2)) == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert op2_quad_search(FiniteTree(2, 3)) == ((0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1))
    assert op2_quad_search(FiniteTree(2, 1)) is None
    assert not op2_quad_check((0, 0), (1, 0), (0, 1), (1, 1))


def test_grid_serializes_sorted():
    g = DownrightGrid(["x", "y"], [("y", "x"), ("y", "y"), ("x", "x")])
    assert g.to_dict() == {"order": ["x", "y"], "cells": [[0, 0], [1, 0], [1, 1]]}
