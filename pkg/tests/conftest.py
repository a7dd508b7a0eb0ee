import itertools
import random

import pytest

from ksplit.structures import KSetColoring, Signature, Structure, TupleRelation


def random_graph(n: int, p: float, seed: int, arity: int = 2) -> Structure:
    rng = random.Random(seed)
    elems = tuple(range(n))
    tuples = [t for t in itertools.product(elems, repeat=arity) if rng.random() < p]
    sig = Signature.one_sorted({"R": arity, "P": 1})
    unary = [(x,) for x in elems if rng.random() < 0.5]
    return Structure(sig, {"el": elems}, {"R": TupleRelation(arity, tuples), "P": TupleRelation(1, unary)})


def random_coloring(n: int, k: int, colors: int, seed: int) -> Structure:
    rng = random.Random(seed)
    elems = tuple(range(n))
    col = {frozenset(s): rng.randrange(colors) for s in itertools.combinations(elems, k)}
    sig = Signature.one_sorted({"E": 2 * k})
    return Structure(sig, {"el": elems}, {"E": KSetColoring(k, col)})


def atom_oracle(S: Structure, C, a) -> dict:
    """Truth value of every atom R(x...) and x=y over C + variables v_j."""
    terms = [("c", c) for c in sorted(C, key=S.order)] + [("v", j) for j in range(len(a))]

    def val(t):
        return t[1] if t[0] == "c" else a[t[1]]

    out = {}
    for s, t in itertools.product(terms, repeat=2):
        out[("=", s, t)] = val(s) == val(t)
    for sym in S.signature.relations:
        for args in itertools.product(terms, repeat=sym.arity):
            if all(x[0] == "c" for x in args):
                continue
            out[(sym.name, args)] = S.holds(sym.name, [val(x) for x in args])
    return out


@pytest.fixture
def oracle():
    return atom_oracle


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
