"""Finite trees under the lexicographic order, meets, and downright-closed grids."""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .report import NotDownrightClosed, Report, failed, passed

Node = tuple


def meet(s: Node, t: Node) -> Node:
    """Longest common prefix."""
    n = 0
    for x, y in zip(s, t):
        if x != y:
            break
        n += 1
    return s[:n]


def proper_prefix(s: Node, t: Node) -> bool:
    """s is a proper initial segment of t (written s ◁ t)."""
    return len(s) < len(t) and t[: len(s)] == s


@dataclass(frozen=True)
class FiniteTree:
    """All sequences over range(branching) of length <= depth; leaves have length depth."""

    branching: int
    depth: int

    def __post_init__(self):
        if self.branching < 1 or self.depth < 0:
            raise ValueError("need branching >= 1 and depth >= 0")

    def leaves(self) -> list[Node]:
        return list(itertools.product(range(self.branching), repeat=self.depth))

    def nodes(self) -> list[Node]:
        return [n for d in range(self.depth + 1) for n in itertools.product(range(self.branching), repeat=d)]


@dataclass(frozen=True)
class DownrightGrid:
    order: tuple
    cells: frozenset

    def __init__(self, order: Iterable, cells: Iterable = ()):
        object.__setattr__(self, "order", tuple(order))
        object.__setattr__(self, "cells", frozenset(tuple(c) for c in cells))
        if len(set(self.order)) != len(self.order):
            raise ValueError("order has repeated points")

    def __contains__(self, cell) -> bool:
        return tuple(cell) in self.cells

    def rank(self) -> dict:
        return {x: i for i, x in enumerate(self.order)}

    def to_dict(self) -> dict:
        r = self.rank()
        return {"order": [list(x) if isinstance(x, tuple) else x for x in self.order],
                "cells": sorted([r[i], r[j]] for i, j in self.cells)}


def _violation(g: DownrightGrid):
    r = g.rank()
    for i, j in sorted(g.cells, key=lambda c: (r[c[0]], r[c[1]])):
        for k in g.order[r[i]:]:
            for l in g.order[: r[j] + 1]:
                if (k, l) not in g.cells:
                    return (i, j), (k, l)
    return None


def is_downright_closed(g: DownrightGrid) -> bool:
    """(i, j) in X, k >= i and l <= j imply (k, l) in X."""
    return _violation(g) is None


def all_downright_closed(order: Sequence) -> list[DownrightGrid]:
    """Every downright-closed subset of order^2, by brute force over all subsets."""
    cells = list(itertools.product(order, repeat=2))
    out = []
    for mask in range(1 << len(cells)):
        g = DownrightGrid(order, (c for b, c in enumerate(cells) if mask >> b & 1))
        if is_downright_closed(g):
            out.append(g)
    return out


def x_set(t: FiniteTree, eta: Node) -> frozenset:
    """{(nu, xi) : eta < nu < xi lexicographically and eta ∧ nu ◁ nu ∧ xi}."""
    L = t.leaves()
    return frozenset(
        (nu, xi) for nu in L for xi in L
        if eta < nu < xi and proper_prefix(meet(eta, nu), meet(nu, xi))
    )


def y_set(t: FiniteTree, eta: Node) -> frozenset:
    """{(nu, xi) : eta < nu and (nu ∧ eta ◁ nu ∧ xi or nu >= xi)}."""
    L = t.leaves()
    return frozenset(
        (nu, xi) for nu in L for xi in L
        if eta < nu and (proper_prefix(meet(nu, eta), meet(nu, xi)) or nu >= xi)
    )


def z_set(t: FiniteTree, eta: Node | None = None) -> frozenset:
    """{(nu, xi) : nu >= xi}; eta is accepted for symmetry and ignored."""
    L = t.leaves()
    return frozenset((nu, xi) for nu in L for xi in L if nu >= xi)


def verify_lemma_A4(t: FiniteTree) -> Report:
    """For every leaf eta: X = Y minus Z, with Y and Z downright closed."""
    L = t.leaves()
    z = z_set(t)
    zg = DownrightGrid(L, z)
    if not is_downright_closed(zg):
        cell, missing = _violation(zg)
        return failed({"eta": None, "cell": missing}, "Z is not downright closed")
    checked = 0
    for eta in L:
        x, y = x_set(t, eta), y_set(t, eta)
        checked += 1
        if x != y - z:
            cell = sorted(x ^ (y - z))[0]
            return failed({"eta": eta, "cell": cell}, "X differs from Y minus Z", {"leaves": checked})
        bad = _violation(DownrightGrid(L, y))
        if bad is not None:
            return failed({"eta": eta, "cell": bad[1]}, "Y is not downright closed", {"leaves": checked})
    return passed({"leaves": checked}, vacuous=len(L) <= 1)


BOTTOM = None


def f_of_X(g: DownrightGrid) -> dict:
    """i -> max{j : some l <= i has (l, j) in X}, or BOTTOM when that set is empty."""
    if not is_downright_closed(g):
        raise NotDownrightClosed("f_X needs a downright-closed grid")
    r = g.rank()
    out = {}
    for i in g.order:
        js = [j for (l, j) in g.cells if r[l] <= r[i]]
        out[i] = max(js, key=r.__getitem__) if js else BOTTOM
    return out


def verify_fX_claim(g: DownrightGrid) -> Report:
    """j <= f_X(i) iff (i, j) in X, and f_X is non-decreasing (BOTTOM below everything)."""
    f = f_of_X(g)
    r = g.rank()

    def level(v):
        return -1 if v is BOTTOM else r[v]

    checks = 0
    for i, j in itertools.product(g.order, repeat=2):
        checks += 1
        if (r[j] <= level(f[i])) != ((i, j) in g.cells):
            return failed({"cell": (i, j)}, "j <= f_X(i) disagrees with membership", {"checks": checks})
    for a, b in zip(g.order, g.order[1:]):
        if level(f[a]) > level(f[b]):
            return failed({"cell": (a, b)}, "f_X decreases", {"checks": checks})
    return passed({"checks": checks})


def graph_of(order: Sequence, f: dict) -> DownrightGrid:
    """{(i, j) : j <= f(i)}; downright closed whenever f is non-decreasing."""
    r = {x: n for n, x in enumerate(order)}
    return DownrightGrid(order, ((i, j) for i in order for j in order
                                 if f[i] is not BOTTOM and r[j] <= r[f[i]]))


def op2_quad_check(q0: Node, q1: Node, q2: Node, q3: Node) -> bool:
    """q0 < q1 < q2 < q3, q1 ∧ q3 ◁ q0 ∧ q1 and q0 ∧ q2 ◁ q2 ∧ q3."""
    return (q0 < q1 < q2 < q3
            and proper_prefix(meet(q1, q3), meet(q0, q1))
            and proper_prefix(meet(q0, q2), meet(q2, q3)))


def op2_quad_search(t: FiniteTree) -> tuple | None:
    """Lex-first quadruple of leaves passing op2_quad_check."""
    for quad in itertools.combinations(t.leaves(), 4):
        if op2_quad_check(*quad):
            return quad
    return None
