"""Constructors and validators for the explicit example structures.

Equiv_k models carry a single 2k-ary relation ``E`` stored as a coloring of
k-subsets; hypergraphs carry a symmetric k-ary relation ``R``; T_k models
use unary ``P0..Pk``, a linear order ``lt``, a 2k-ary order ``ltk`` on
P0 x ... x P(k-1), and a (k+1)-ary ``R``.
"""

from __future__ import annotations

import itertools
import random
from collections.abc import Iterable, Sequence

from .report import BudgetExceeded, NotSubstructure, Report, failed, passed
from .structures import KSetColoring, Signature, Structure, TupleRelation

# -- Equiv_k ------------------------------------------------------------------


def equiv_signature(k: int) -> Signature:
    return Signature.one_sorted({"E": 2 * k})


def equiv_structure(k: int, elems: Sequence, colors: dict, names=None) -> Structure:
    return Structure(equiv_signature(k), {"el": tuple(elems)}, {"E": KSetColoring(k, colors)}, names=names)


def _singletons_except(k: int, elems: Sequence, classes: Iterable[Iterable[frozenset]]) -> dict:
    """Color every k-subset of elems by itself, except the listed classes which share a color."""
    colors = {}
    for i, cls in enumerate(classes):
        for s in cls:
            colors[frozenset(s)] = ("class", i)
    for c in itertools.combinations(elems, k):
        colors.setdefault(frozenset(c), ("solo", c))
    return colors


def validate_equiv_k0(S: Structure) -> Report:
    """Check the three axioms: partial equivalence on k-tuples, E(x,x) iff x is injective,
    invariance under permuting either k-tuple."""
    sym = S.signature.relations[0]
    if len(S.signature.relations) != 1 or sym.arity % 2:
        return failed({}, "signature is not a single even-arity relation")
    k = sym.arity // 2
    rel = S.relations[sym.name]
    elems = list(S.elements())
    if isinstance(rel, KSetColoring):
        # axioms hold by construction once every k-subset of the universe is colored
        universe = set(elems)
        for s in rel.colors:
            if not s <= universe:
                return failed({"set": sorted(s, key=repr)}, "colored set leaves the universe")
        for c in itertools.combinations(elems, k):
            if frozenset(c) not in rel.colors:
                return failed({"tuple": list(c)}, "reflexivity: injective tuple without E(x,x)")
        return passed({"ksets": len(rel.colors)}, path="coloring")
    tuples = list(itertools.product(elems, repeat=k))
    checks = 0
    for x in tuples:
        checks += 1
        if rel.holds(x + x) != (len(set(x)) == k):
            return failed({"tuple": list(x)}, "reflexivity: E(x,x) must hold exactly on injective x", {"checks": checks})
    related = {x: [y for y in tuples if rel.holds(x + y)] for x in tuples}
    for x in tuples:
        for y in related[x]:
            checks += 1
            if not rel.holds(y + x):
                return failed({"tuple": list(x), "other": list(y)}, "partial equivalence: not symmetric", {"checks": checks})
            for z in related[y]:
                if not rel.holds(x + z):
                    return failed({"tuple": list(x), "other": list(z)}, "partial equivalence: not transitive",
                                  {"checks": checks})
            for p in itertools.permutations(range(k)):
                if not rel.holds(tuple(x[i] for i in p) + y) or not rel.holds(x + tuple(y[i] for i in p)):
                    return failed({"tuple": list(x), "other": list(y), "perm": list(p)},
                                  "permutation invariance fails", {"checks": checks})
    return passed({"checks": checks}, path="tuples")


def random_equiv_k(n: int, k: int, colors: int, seed: int) -> Structure:
    """Each k-subset of range(n) gets an independent uniform color from range(colors)."""
    if n < k or colors < 1:
        raise ValueError("need n >= k and colors >= 1")
    rng = random.Random(seed)
    col = {frozenset(c): rng.randrange(colors) for c in itertools.combinations(range(n), k)}
    return equiv_structure(k, range(n), col)


def _check_substructure(S0: Structure, S: Structure, label: str):
    for e in S0.elements():
        if e not in S or S.sort_of(e) != S0.sort_of(e):
            raise NotSubstructure(f"{e!r} of the base is missing from {label}")
    if not S.signature.relational or S.signature != S0.signature:
        raise NotSubstructure(f"{label} does not share the base's relational signature")
    base = set(S0.elements())
    for sym in S0.signature.relations:
        if S0.relations[sym.name].atoms_within(base) != S.relations[sym.name].atoms_within(base):
            raise NotSubstructure(f"{sym.name} restricted to the base differs in {label}")


def _amalgam_parts(S0: Structure, S1: Structure, S2: Structure):
    _check_substructure(S0, S1, "S1")
    _check_substructure(S0, S2, "S2")
    base = set(S0.elements())
    extra1 = [e for e in S1.elements() if e not in base]
    extra2 = [e for e in S2.elements() if e not in base]
    if set(extra1) & set(extra2):
        raise NotSubstructure("S1 and S2 share elements outside the base")
    universe = {s: tuple(S1.universe[s]) + tuple(e for e in S2.universe[s] if e not in base)
                for s in S0.signature.sorts}
    return base, set(extra1), set(extra2), universe


def _merged_coloring(r1: KSetColoring, r2: KSetColoring, base: set, elems: list, transitive: bool):
    """Union of two colorings agreeing on the base; None if it is not transitive and transitive=False."""
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, c in r1.colors.items():
        find((1, c))
    for s, c in r2.colors.items():
        find((2, c))
        if s <= base:
            parent[find((2, c))] = find((1, r1.colors[s]))
    sides: dict = {}
    colors = {}
    for side, r in ((1, r1), (2, r2)):
        for s, c in r.colors.items():
            root = find((side, c))
            colors[s] = root
            if not s <= base:
                sides.setdefault(root, set()).add(side)
    if not transitive and any(len(v) > 1 for v in sides.values()):
        return None
    k = r1.k
    for c in itertools.combinations(elems, k):
        colors.setdefault(frozenset(c), ("mixed", c))
    return KSetColoring(k, colors)


def free_amalgam(S0: Structure, S1: Structure, S2: Structure) -> Structure:
    """Union of S1 and S2 over the common substructure S0, adding no relation instances.

    The only tuples added are the E(x,x) instances on mixed k-sets, which
    the reflexivity axiom of Equiv_k forces.  When a class of S0 is
    extended on both sides the union is not transitive, so the result is
    returned as a plain tuple relation and fails validation.
    """
    base, _, _, universe = _amalgam_parts(S0, S1, S2)
    elems = [e for s in S0.signature.sorts for e in universe[s]]
    relations = {}
    for sym in S0.signature.relations:
        r1, r2 = S1.relations[sym.name], S2.relations[sym.name]
        if isinstance(r1, KSetColoring) and isinstance(r2, KSetColoring):
            merged = _merged_coloring(r1, r2, base, elems, transitive=False)
            if merged is not None:
                relations[sym.name] = merged
                continue
            k = r1.k
            tuples = set(r1.tuples()) | set(r2.tuples())
            for c in itertools.combinations(elems, k):
                if not (set(c) <= set(S1.elements()) or set(c) <= set(S2.elements())):
                    tuples.update(p + p for p in itertools.permutations(c))
            relations[sym.name] = TupleRelation(sym.arity, tuples)
        else:
            relations[sym.name] = TupleRelation(sym.arity, set(r1.atoms_within(set(S1.elements())))
                                                | set(r2.atoms_within(set(S2.elements()))))
    names = {**S1.names, **S2.names}
    return Structure(S0.signature, universe, relations, names=names)


def amalgamate_equiv(S0: Structure, S1: Structure, S2: Structure) -> Structure:
    """Equiv_k amalgam over S0: classes meeting a common class of S0 are merged."""
    base, _, _, universe = _amalgam_parts(S0, S1, S2)
    elems = [e for s in S0.signature.sorts for e in universe[s]]
    sym = S0.signature.relations[0]
    merged = _merged_coloring(S1.relations[sym.name], S2.relations[sym.name], base, elems, transitive=True)
    return Structure(S0.signature, universe, {sym.name: merged}, names={**S1.names, **S2.names})


def build_equiv_witness(k: int, N: int) -> tuple[Structure, dict]:
    """a_0..a_{2k-3} and b_i, c_i, b'_i, c'_i (i < N); the only non-trivial E-classes are
    {a_0..a_{k-2} b_i, a_{k-1}..a_{2k-3} c_i}, one per i."""
    if k < 2 or N < 1:
        raise ValueError("need k >= 2 and N >= 1")
    names = [f"a{j}" for j in range(2 * k - 2)]
    for i in range(N):
        names += [f"b{i}", f"c{i}", f"b'{i}", f"c'{i}"]
    table = {n: idx for idx, n in enumerate(names)}
    left = [table[f"a{j}"] for j in range(k - 1)]
    right = [table[f"a{j}"] for j in range(k - 1, 2 * k - 2)]
    classes = [[frozenset(left + [table[f"b{i}"]]), frozenset(right + [table[f"c{i}"]])] for i in range(N)]
    elems = list(range(len(names)))
    return equiv_structure(k, elems, _singletons_except(k, elems, classes), table), table


def nonsplitting_base_equiv(S: Structure, blocks: Sequence[Sequence], B: Iterable) -> frozenset:
    """For each k-set d from the block elements, the lex-first E-related k-set meeting B;
    returns the B-elements of the recorded sets."""
    rel = S.relations[S.signature.relations[0].name]
    k = rel.k
    B = frozenset(B)
    block_elems = S.sorted({x for blk in blocks for x in blk})
    pool = S.sorted(B | set(block_elems))
    by_color: dict = {}
    for c in itertools.combinations(pool, k):
        if B.intersection(c):
            by_color.setdefault(rel.colors.get(frozenset(c)), c)
    out = set()
    for d in itertools.combinations(block_elems, k):
        hit = by_color.get(rel.colors.get(frozenset(d)))
        if hit is not None:
            out.update(x for x in hit if x in B)
    return frozenset(out)


def build_ipk_witness(k: int, n: int, X: Iterable) -> tuple[Structure, dict]:
    """ā = a_0..a_{k-1}, an array b^j_i (j < k-1, i < n) and c with
    E(ā; b^0_{i_0} ... b^{k-2}_{i_{k-2}} c) exactly for (i_0, ..., i_{k-2}) in X."""
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")
    X = {(x,) if isinstance(x, int) else tuple(x) for x in X}
    for x in X:
        if len(x) != k - 1 or not all(0 <= i < n for i in x):
            raise ValueError(f"index {x} is not in [n]^(k-1)")
    names = [f"a{j}" for j in range(k)]
    names += [f"b{j}_{i}" for j in range(k - 1) for i in range(n)]
    names.append("c")
    table = {nm: idx for idx, nm in enumerate(names)}
    cls = [frozenset(table[f"a{j}"] for j in range(k))]
    for x in sorted(X):
        cls.append(frozenset([table[f"b{j}_{i}"] for j, i in enumerate(x)] + [table["c"]]))
    elems = list(range(len(names)))
    S = equiv_structure(k, elems, _singletons_except(k, elems, [cls]), table)
    report = validate_equiv_k0(S)
    if not report:
        raise AssertionError(f"IP witness failed validation: {report.first_violation}")
    return S, table


def ipk_pattern(S: Structure, k: int, n: int) -> set:
    """Index tuples i with E(ā; b^0_{i_0} ... c) in S."""
    t = S.names
    abar = tuple(t[f"a{j}"] for j in range(k))
    out = set()
    for idx in itertools.product(range(n), repeat=k - 1):
        row = tuple(t[f"b{j}_{i}"] for j, i in enumerate(idx)) + (t["c"],)
        if S.holds("E", abar + row):
            out.add(idx)
    return out


# -- hypergraphs --------------------------------------------------------------


def hypergraph_structure(k: int, elems: Sequence, edges: Iterable[Iterable], names=None) -> Structure:
    tuples = {p for e in edges for p in itertools.permutations(tuple(e))}
    return Structure(Signature.one_sorted({"R": k}), {"el": tuple(elems)}, {"R": TupleRelation(k, tuples)},
                     names=names)


def build_hypergraph_witness(k: int, N: int) -> tuple[Structure, dict]:
    """a_0..a_{k-2}, b_i and b'_i (i < N); the only edges are {a_0..a_{k-2}, b_i}."""
    if k < 2 or N < 0:
        raise ValueError("need k >= 2")
    names = [f"a{j}" for j in range(k - 1)]
    for i in range(N):
        names += [f"b{i}", f"b'{i}"]
    table = {nm: idx for idx, nm in enumerate(names)}
    a = [table[f"a{j}"] for j in range(k - 1)]
    edges = [a + [table[f"b{i}"]] for i in range(N)]
    return hypergraph_structure(k, range(len(names)), edges, table), table


def random_hypergraph(n: int, k: int, p: float, seed: int) -> Structure:
    """Erdos-Renyi k-uniform hypergraph on range(n); each k-set is an edge with probability p."""
    rng = random.Random(seed)
    edges = [c for c in itertools.combinations(range(n), k) if rng.random() < p]
    return hypergraph_structure(k, range(n), edges)


# -- T_k ----------------------------------------------------------------------


def tk_signature(k: int) -> Signature:
    rels = {f"P{i}": 1 for i in range(k + 1)}
    rels.update(lt=2, ltk=2 * k, R=k + 1)
    return Signature.one_sorted(rels)


def build_K_config(k: int, ell: int) -> tuple[Structure, dict]:
    """The finite T_k model K: b_0 < c_0 < ... < b_{ell-1} < c_{ell-1} in P0, one a_i in each P_i
    (1 <= i <= k), tuples (b_j, ā) ascending then (c_j, ā) descending in ltk, R(b_j ā a_k) only."""
    if k < 1 or ell < 1:
        raise ValueError("need k >= 1 and ell >= 1")
    names = []
    for j in range(ell):
        names += [f"b{j}", f"c{j}"]
    names += [f"a{i}" for i in range(1, k + 1)]
    table = {nm: idx for idx, nm in enumerate(names)}
    abar = tuple(table[f"a{i}"] for i in range(1, k))
    ak = table[f"a{k}"]
    rels = {f"P{i}": TupleRelation(1, [(table[f"a{i}"],)]) for i in range(1, k + 1)}
    rels["P0"] = TupleRelation(1, [(table[f"{x}{j}"],) for j in range(ell) for x in "bc"])
    order = list(range(len(names)))
    rels["lt"] = TupleRelation(2, itertools.combinations(order, 2))
    chain = [(table[f"b{j}"],) + abar for j in range(ell)] + [(table[f"c{j}"],) + abar for j in reversed(range(ell))]
    rels["ltk"] = TupleRelation(2 * k, (x + y for x, y in itertools.combinations(chain, 2)))
    rels["R"] = TupleRelation(k + 1, [(table[f"b{j}"],) + abar + (ak,) for j in range(ell)])
    S = Structure(tk_signature(k), {"el": tuple(order)}, rels, names=table)
    return S, table


def validate_tk(S: Structure, k: int) -> Report:
    elems = list(S.elements())
    part = {}
    checks = 0
    for e in elems:
        hits = [i for i in range(k + 1) if S.holds(f"P{i}", (e,))]
        checks += 1
        if len(hits) != 1:
            return failed({"element": e}, "P0..Pk is not a partition", {"checks": checks})
        part[e] = hits[0]
    lt = S.relations["lt"]
    for x, y in itertools.product(elems, repeat=2):
        checks += 1
        if x == y and lt.holds((x, y)):
            return failed({"pair": [x, y]}, "< is not irreflexive", {"checks": checks})
        if x != y and lt.holds((x, y)) == lt.holds((y, x)):
            return failed({"pair": [x, y]}, "< is not total and antisymmetric", {"checks": checks})
        if part[x] < part[y] and not lt.holds((x, y)):
            return failed({"pair": [x, y]}, "parts are not ordered P0 < ... < Pk", {"checks": checks})
    for x, y, z in itertools.product(elems, repeat=3):
        if lt.holds((x, y)) and lt.holds((y, z)) and not lt.holds((x, z)):
            return failed({"triple": [x, y, z]}, "< is not transitive", {"checks": checks})
    for t in S.relations["R"].tuples():
        checks += 1
        if any(part[x] != i for i, x in enumerate(t)):
            return failed({"tuple": list(t)}, "R tuple leaves P0 x ... x Pk", {"checks": checks})
    grid = list(itertools.product(*[[e for e in elems if part[e] == i] for i in range(k)]))
    ltk = S.relations["ltk"]
    for t in ltk.tuples():
        if t[:k] not in grid or t[k:] not in grid:
            return failed({"tuple": list(t)}, "<_k holds outside (P0 x ... x P(k-1))^2", {"checks": checks})
    for x, y in itertools.product(grid, repeat=2):
        checks += 1
        if x == y and ltk.holds(x + y):
            return failed({"pair": [list(x), list(y)]}, "<_k is not irreflexive", {"checks": checks})
        if x != y and ltk.holds(x + y) == ltk.holds(y + x):
            return failed({"pair": [list(x), list(y)]}, "<_k is not total and antisymmetric", {"checks": checks})
    for x, y, z in itertools.product(grid, repeat=3):
        if ltk.holds(x + y) and ltk.holds(y + z) and not ltk.holds(x + z):
            return failed({"triple": [list(x), list(y), list(z)]}, "<_k is not transitive", {"checks": checks})
    R = S.relations["R"]
    for t in R.tuples():
        y, w = t[:k], t[k]
        for x in grid:
            if not (x == y or ltk.holds(x + y)):
                continue
            for z in elems:
                if (z == w or lt.holds((w, z))):
                    checks += 1
                    if not R.holds(x + (z,)):
                        return failed({"x": list(x), "y": list(y), "w": w, "z": z},
                                      "downward closure of R fails", {"checks": checks})
    return passed({"checks": checks})


# -- order property -----------------------------------------------------------


def find_order_property(S: Structure, relation: str, n: int, budget: int = 10**6) -> dict | None:
    """Tuples g_0..g_{n-1}, h_0..h_{n-1} with relation(g_i, h_j) iff i < j, or None.

    Tuples with identical neighbourhoods are interchangeable and no witness
    uses two of them on the same side, so the search runs over one
    representative per neighbourhood.  Backtracking assigns g_0, h_0, g_1,
    h_1, ... with forward checking; ``budget`` bounds the number of search
    nodes and BudgetExceeded is raised when it runs out.
    """
    rel = S.relations[relation]
    if rel.arity % 2:
        raise ValueError("relation arity must be even")
    if n < 1:
        return {"g": [], "h": []}
    m = rel.arity // 2
    tuples = list(itertools.product(S.sorted(S.elements()), repeat=m))
    adj = [[rel.holds(x + y) for y in tuples] for x in tuples]
    g_reps = list({tuple(row): x for x, row in reversed(list(zip(tuples, adj)))}.values())
    cols = [tuple(adj[i][j] for i in range(len(tuples))) for j in range(len(tuples))]
    h_reps = list({col: y for y, col in reversed(list(zip(tuples, cols)))}.values())
    g_reps.sort(key=tuples.index)
    h_reps.sort(key=tuples.index)
    gi = {x: i for i, x in enumerate(tuples)}
    # out_g[a] = bitmask of h-reps related to g-rep a; in_h[b] likewise for h-rep b
    out_g = [sum(1 << b for b, y in enumerate(h_reps) if adj[gi[x]][gi[y]]) for x in g_reps]
    in_h = [sum(1 << a for a, x in enumerate(g_reps) if adj[gi[x]][gi[y]]) for y in h_reps]
    all_g, all_h = (1 << len(g_reps)) - 1, (1 << len(h_reps)) - 1
    g: list[int] = []
    h: list[int] = []
    nodes = 0

    def g_domain(i: int) -> int:
        dom = all_g
        for j, b in enumerate(h):
            dom &= in_h[b] if i < j else ~in_h[b]
        return dom & ~sum(1 << a for a in g)

    def h_domain(j: int) -> int:
        dom = all_h
        for i, a in enumerate(g):
            dom &= out_g[a] if i < j else ~out_g[a]
        return dom & ~sum(1 << b for b in h)

    def alive() -> bool:
        return all(g_domain(i) for i in range(len(g), n)) and all(h_domain(j) for j in range(len(h), n))

    def bits(mask: int):
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def search() -> bool:
        nonlocal nodes
        if len(h) == n:
            return True
        placing_g = len(g) == len(h)
        side = g if placing_g else h
        dom = g_domain(len(g)) if placing_g else h_domain(len(h))
        for c in bits(dom):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("order property search", budget)
            side.append(c)
            if alive() and search():
                return True
            side.pop()
        return False

    if not search():
        return None
    return {"g": [g_reps[a] for a in g], "h": [h_reps[b] for b in h]}


def extend_equiv_random(S: Structure, names: Sequence[str], seed: int, fresh: int = 2) -> tuple[Structure, dict]:
    """Add named elements to an Equiv_k model; each new k-set joins a uniformly chosen existing
    class or one of ``fresh`` new classes."""
    rel = S.relations[S.signature.relations[0].name]
    k = rel.k
    rng = random.Random(seed)
    palette = sorted(set(rel.colors.values()), key=repr) + [("new", i) for i in range(fresh)]
    table = dict(S.names)
    elems = list(S.elements())
    start = max((e for e in elems if isinstance(e, int)), default=-1) + 1
    for i, nm in enumerate(names):
        table[nm] = start + i
        elems.append(start + i)
    colors = dict(rel.colors)
    for c in itertools.combinations(elems, k):
        colors.setdefault(frozenset(c), palette[rng.randrange(len(palette))])
    return equiv_structure(k, elems, colors, table), table
