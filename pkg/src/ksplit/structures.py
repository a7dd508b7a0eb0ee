"""Finite multi-sorted structures, partial maps and quantifier-free type equality.

Two tuples ``a`` and ``b`` have the same type over ``C`` when the map fixing
``C`` and sending ``a`` to ``b`` is a partial isomorphism (relational
signatures), or extends to an isomorphism of the generated substructures
(signatures with functions).  For the theories handled here, which all
eliminate quantifiers, this is the full type.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .report import ExtensionClash, SortMismatch

Element = Hashable


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    arity: int
    profile: tuple[str, ...]


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    arity: int
    profile: tuple[str, ...]
    result: str


@dataclass(frozen=True)
class Signature:
    sorts: tuple[str, ...]
    relations: tuple[RelationSymbol, ...] = ()
    functions: tuple[FunctionSymbol, ...] = ()

    def __post_init__(self):
        names = [r.name for r in self.relations] + [f.name for f in self.functions]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate symbol names in {names}")
        known = set(self.sorts)
        for sym in self.relations + self.functions:
            if len(sym.profile) != sym.arity:
                raise ValueError(f"{sym.name}: profile length {len(sym.profile)} != arity {sym.arity}")
            bad = set(sym.profile) - known
            if isinstance(sym, FunctionSymbol) and sym.result not in known:
                bad.add(sym.result)
            if bad:
                raise ValueError(f"{sym.name}: unknown sorts {sorted(bad)}")

    @classmethod
    def one_sorted(cls, relations: Mapping[str, int] = (), functions: Mapping[str, int] = (), sort="el"):
        rels = tuple(RelationSymbol(n, a, (sort,) * a) for n, a in dict(relations).items())
        fns = tuple(FunctionSymbol(n, a, (sort,) * a, sort) for n, a in dict(functions).items())
        return cls((sort,), rels, fns)

    @property
    def relational(self) -> bool:
        return not self.functions

    def relation(self, name: str) -> RelationSymbol:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(name)


# Relation interpretations.  Each exposes holds(), tuples(), atoms_within(),
# preserved_by() and local_key(); the last one is the workhorse of fast
# type comparison: it lists, abstractly, every true atom over params + new
# elements that mentions at least one new element.

def _mark(x, params, pos):
    return (1, pos[x]) if x in pos else (0, x)


class TupleRelation:
    """A relation given by its explicit set of tuples."""

    def __init__(self, arity: int, tuples: Iterable[Sequence]):
        self.arity = arity
        self._tuples = frozenset(tuple(t) for t in tuples)
        for t in self._tuples:
            if len(t) != arity:
                raise ValueError(f"tuple {t} does not have arity {arity}")
        index = defaultdict(list)
        for t in self._tuples:
            for x in set(t):
                index[x].append(t)
        self._index = dict(index)

    def holds(self, t: Sequence) -> bool:
        return tuple(t) in self._tuples

    def tuples(self):
        return self._tuples

    def atoms_within(self, elems) -> set:
        elems = set(elems)
        out = set() if self.arity else set(self._tuples)
        for e in elems:
            for t in self._index.get(e, ()):
                if all(x in elems for x in t):
                    out.add(t)
        return out

    def preserved_by(self, m: Mapping) -> bool:
        dom, ran = set(m), set(m.values())
        image = {tuple(m[x] for x in t) for t in self.atoms_within(dom)}
        return image == self.atoms_within(ran)

    def local_key(self, params: frozenset, new: Sequence):
        pos = {x: i for i, x in enumerate(new)}
        out = set()
        for x in new:
            for t in self._index.get(x, ()):
                if all(y in pos or y in params for y in t):
                    out.add(tuple(_mark(y, params, pos) for y in t))
        return frozenset(out)


class PredicateRelation:
    """A relation given by a membership test; atoms are found by enumeration."""

    def __init__(self, arity: int, test: Callable[..., bool]):
        self.arity = arity
        self._test = test

    def holds(self, t: Sequence) -> bool:
        return bool(self._test(*t))

    def atoms_within(self, elems) -> set:
        elems = list(elems)
        return {t for t in itertools.product(elems, repeat=self.arity) if self._test(*t)}

    def tuples(self):
        raise TypeError("predicate relations have no explicit tuple list")

    def preserved_by(self, m: Mapping) -> bool:
        dom = list(m)
        for t in itertools.product(dom, repeat=self.arity):
            if self._test(*t) != self._test(*(m[x] for x in t)):
                return False
        return True

    def local_key(self, params: frozenset, new: Sequence):
        pos = {x: i for i, x in enumerate(new)}
        pool = list(params) + list(new)
        out = set()
        for t in itertools.product(pool, repeat=self.arity):
            if any(y in pos for y in t) and self._test(*t):
                out.add(tuple(_mark(y, params, pos) for y in t))
        return frozenset(out)


class KSetColoring:
    """The 2k-ary relation E of an Equiv_k model, stored as a coloring of k-sets.

    ``E(x, y)`` holds iff both k-tuples are injective and their underlying
    sets carry the same color.  Every k-subset of the universe must be colored.
    """

    def __init__(self, k: int, colors: Mapping[frozenset, Hashable]):
        self.k = k
        self.arity = 2 * k
        self.colors = {frozenset(s): c for s, c in colors.items()}
        for s in self.colors:
            if len(s) != k:
                raise ValueError(f"colored set {set(s)} is not a {k}-set")
        self._param_cache: dict = {}

    def color(self, xs):
        s = frozenset(xs)
        if len(s) != self.k or len(xs) != self.k:
            return None
        return self.colors.get(s)

    def holds(self, t: Sequence) -> bool:
        k = self.k
        cx, cy = self.color(t[:k]), self.color(t[k:])
        return cx is not None and cx == cy

    def classes(self) -> dict:
        out = defaultdict(list)
        for s, c in self.colors.items():
            out[c].append(s)
        return dict(out)

    def tuples(self):
        for members in self.classes().values():
            orderings = [p for s in members for p in itertools.permutations(s)]
            for x in orderings:
                for y in orderings:
                    yield x + y

    def _labels(self, subsets):
        # canonical partition of the given k-sets by color
        by_color = defaultdict(set)
        for s in subsets:
            by_color[self.colors.get(s)].add(s)
        return by_color

    def atoms_within(self, elems) -> set:
        elems = set(elems)
        subsets = [frozenset(c) for c in itertools.combinations(elems, self.k)]
        out = set()
        for group in self._labels(subsets).values():
            orderings = [p for s in group for p in itertools.permutations(s)]
            out.update(x + y for x in orderings for y in orderings)
        return out

    def preserved_by(self, m: Mapping) -> bool:
        subsets = [frozenset(c) for c in itertools.combinations(list(m), self.k)]
        seen: dict = {}
        back: dict = {}
        for s in subsets:
            c = self.colors.get(s)
            d = self.colors.get(frozenset(m[x] for x in s))
            if (c is None) != (d is None):
                return False
            if c is None:
                continue
            if seen.setdefault(c, d) != d or back.setdefault(d, c) != c:
                return False
        return True

    def _param_classes(self, params: frozenset) -> dict:
        hit = self._param_cache.get(params)
        if hit is None:
            groups = defaultdict(set)
            for c in itertools.combinations(params, self.k):
                s = frozenset(c)
                groups[self.colors.get(s)].add(s)
            hit = {col: frozenset(g) for col, g in groups.items() if col is not None}
            if len(self._param_cache) > 256:
                self._param_cache.clear()
            self._param_cache[params] = hit
        return hit

    def local_key(self, params: frozenset, new: Sequence):
        k = self.k
        pclasses = self._param_classes(params)
        plist = list(params)
        pos = {x: i for i, x in enumerate(new)}
        with_param = set()
        fresh = defaultdict(set)
        for r in range(1, min(k, len(new)) + 1):
            for ns in itertools.combinations(new, r):
                for ps in itertools.combinations(plist, k - r):
                    col = self.colors.get(frozenset(ns + ps))
                    if col is None:
                        continue
                    abstract = frozenset([(1, pos[x]) for x in ns] + [(0, y) for y in ps])
                    rep = pclasses.get(col)
                    if rep is not None:
                        with_param.add((abstract, rep))
                    else:
                        fresh[col].add(abstract)
        return frozenset(with_param), frozenset(frozenset(g) for g in fresh.values())


class Structure:
    """A finite multi-sorted structure.

    ``universe`` maps each sort to its elements (element identities must be
    distinct across sorts).  Relations map names to one of the interpretation
    classes above; functions map names to a dict from argument tuples to
    values, or to a callable for structures too large to tabulate.
    """

    def __init__(
        self,
        signature: Signature,
        universe: Mapping[str, Iterable],
        relations: Mapping[str, object] = (),
        functions: Mapping[str, object] = (),
        names: Mapping[str, Element] | None = None,
        order_key: Callable | None = None,
        check: bool = True,
    ):
        self.signature = signature
        self.relations = dict(relations)
        self.functions = dict(functions)
        self.names = dict(names or {})
        self.universe = {}
        self._sort_of = {}
        for s in signature.sorts:
            elems = universe.get(s, ())
            if not hasattr(elems, "__contains__") or not hasattr(elems, "__len__"):
                elems = tuple(elems)
            self.universe[s] = elems
        self.lazy = not all(isinstance(v, tuple) for v in self.universe.values())
        if not self.lazy:
            for s, elems in self.universe.items():
                for e in elems:
                    if e in self._sort_of:
                        raise ValueError(f"element {e!r} appears in two sorts")
                    self._sort_of[e] = s
            self._rank = {e: i for i, e in enumerate(self.elements())}
        self._order_key = order_key
        missing = {r.name for r in signature.relations} ^ set(self.relations)
        missing |= {f.name for f in signature.functions} ^ set(self.functions)
        if missing:
            raise ValueError(f"interpretation/signature mismatch on {sorted(missing)}")
        if check and not self.lazy:
            self._check()

    def _check(self):
        for sym in self.signature.relations:
            rel = self.relations[sym.name]
            if rel.arity != sym.arity:
                raise ValueError(f"{sym.name}: interpretation arity {rel.arity} != {sym.arity}")
            if isinstance(rel, TupleRelation):
                for t in rel.tuples():
                    for x, s in zip(t, sym.profile):
                        if self._sort_of.get(x) != s:
                            raise ValueError(f"{sym.name}{t}: {x!r} is not an element of sort {s}")
            elif isinstance(rel, KSetColoring):
                for subset in rel.colors:
                    if any(self._sort_of.get(x) != sym.profile[0] for x in subset):
                        raise ValueError(f"{sym.name}: colored set {set(subset)} leaves the universe")
        for sym in self.signature.functions:
            table = self.functions[sym.name]
            if callable(table):
                continue
            for args in itertools.product(*(self.universe[s] for s in sym.profile)):
                if args not in table:
                    raise ValueError(f"{sym.name} undefined at {args}")
                if self._sort_of.get(table[args]) != sym.result:
                    raise ValueError(f"{sym.name}{args} = {table[args]!r} is not of sort {sym.result}")

    # -- element bookkeeping -------------------------------------------------

    def elements(self):
        for s in self.signature.sorts:
            yield from self.universe[s]

    def __len__(self):
        return sum(len(v) for v in self.universe.values())

    def __contains__(self, e) -> bool:
        if not self.lazy:
            return e in self._sort_of
        return any(e in v for v in self.universe.values())

    def sort_of(self, e) -> str:
        if not self.lazy:
            try:
                return self._sort_of[e]
            except KeyError:
                raise KeyError(f"{e!r} is not in the universe") from None
        for s, v in self.universe.items():
            if e in v:
                return s
        raise KeyError(f"{e!r} is not in the universe")

    def order(self, e):
        """Deterministic ordering key for elements (universe order by default)."""
        if self._order_key is not None:
            return self._order_key(e)
        return self._rank[e]

    def sorted(self, elems: Iterable) -> list:
        return sorted(elems, key=self.order)

    def element(self, name: str):
        return self.names[name]

    # -- interpretation ------------------------------------------------------

    def holds(self, rel: str, args: Sequence) -> bool:
        return self.relations[rel].holds(tuple(args))

    def apply(self, fn: str, args: Sequence):
        table = self.functions[fn]
        args = tuple(args)
        return table(*args) if callable(table) else table[args]

    def restrict(self, elems: Iterable) -> "Structure":
        """Induced substructure on ``elems`` (caller guarantees closure under functions)."""
        keep = set(elems)
        universe = {s: tuple(e for e in self.sorted_universe(s, keep)) for s in self.signature.sorts}
        relations = {}
        for sym in self.signature.relations:
            rel = self.relations[sym.name]
            if isinstance(rel, KSetColoring):
                relations[sym.name] = KSetColoring(
                    rel.k, {s: c for s, c in rel.colors.items() if s <= keep}
                )
            else:
                relations[sym.name] = TupleRelation(sym.arity, rel.atoms_within(keep))
        functions = {}
        for sym in self.signature.functions:
            functions[sym.name] = {
                args: self.apply(sym.name, args)
                for args in itertools.product(*(universe[s] for s in sym.profile))
            }
        names = {n: e for n, e in self.names.items() if e in keep}
        return Structure(self.signature, universe, relations, functions, names)

    def sorted_universe(self, sort: str, keep=None):
        elems = self.universe[sort] if keep is None else [e for e in keep if self.sort_of(e) == sort]
        if keep is None and isinstance(elems, tuple):
            return elems
        return sorted(elems, key=self.order)

    # -- canonical JSON ------------------------------------------------------

    def to_dict(self) -> dict:
        if self.lazy:
            raise TypeError("lazy structures cannot be serialized")
        elems = list(self.elements())
        idx = {e: i for i, e in enumerate(elems)}
        rels = {}
        for sym in self.signature.relations:
            rel = self.relations[sym.name]
            entry = {"tuples": sorted([idx[x] for x in t] for t in rel.tuples())}
            if isinstance(rel, KSetColoring):
                entry["kset_classes"] = sorted(
                    sorted(sorted(idx[x] for x in s) for s in members)
                    for members in rel.classes().values()
                )
            rels[sym.name] = entry
        fns = {}
        for sym in self.signature.functions:
            fns[sym.name] = [
                [idx[a] for a in args] + [idx[self.apply(sym.name, args)]]
                for args in itertools.product(*(self.universe[s] for s in sym.profile))
            ]
        return {
            "signature": {
                "sorts": list(self.signature.sorts),
                "relations": [[r.name, r.arity, list(r.profile)] for r in self.signature.relations],
                "functions": [
                    [f.name, f.arity, list(f.profile), f.result] for f in self.signature.functions
                ],
            },
            "sorts": {s: len(self.universe[s]) for s in self.signature.sorts},
            "labels": [_label(e) for e in elems],
            "names": {n: idx[e] for n, e in sorted(self.names.items())},
            "relations": rels,
            "functions": fns,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Structure":
        sig = data["signature"]
        signature = Signature(
            tuple(sig["sorts"]),
            tuple(RelationSymbol(n, a, tuple(p)) for n, a, p in sig["relations"]),
            tuple(FunctionSymbol(n, a, tuple(p), r) for n, a, p, r in sig["functions"]),
        )
        labels = data.get("labels")
        total = sum(data["sorts"].values())
        elems = [_unlabel(x) for x in labels] if labels else list(range(total))
        if len(elems) != total or len(set(elems)) != total:
            raise ValueError("element labels do not match sort counts")
        universe, start = {}, 0
        for s in signature.sorts:
            n = data["sorts"][s]
            universe[s] = tuple(elems[start : start + n])
            start += n
        relations = {}
        for sym in signature.relations:
            entry = data["relations"][sym.name]
            if "kset_classes" in entry:
                colors = {
                    frozenset(elems[i] for i in s): c
                    for c, members in enumerate(entry["kset_classes"])
                    for s in members
                }
                relations[sym.name] = KSetColoring(sym.arity // 2, colors)
            else:
                relations[sym.name] = TupleRelation(
                    sym.arity, (tuple(elems[i] for i in t) for t in entry["tuples"])
                )
        functions = {
            sym.name: {
                tuple(elems[i] for i in row[:-1]): elems[row[-1]] for row in data["functions"][sym.name]
            }
            for sym in signature.functions
        }
        names = {n: elems[i] for n, i in data.get("names", {}).items()}
        return cls(signature, universe, relations, functions, names)

    @classmethod
    def from_json(cls, text: str) -> "Structure":
        return cls.from_dict(json.loads(text))


def _label(e):
    return list(_label(x) for x in e) if isinstance(e, tuple) else e


def _unlabel(x):
    return tuple(_unlabel(y) for y in x) if isinstance(x, list) else x


@dataclass(frozen=True)
class PartialMap:
    pairs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        src = [a for a, _ in self.pairs]
        dst = [b for _, b in self.pairs]
        if len(set(src)) != len(src) or len(set(dst)) != len(dst):
            raise ValueError("partial map must be functional and injective")

    @classmethod
    def from_dict(cls, m: Mapping) -> "PartialMap":
        return cls(tuple(m.items()))

    def as_dict(self) -> dict:
        return dict(self.pairs)

    def inverse(self) -> "PartialMap":
        return PartialMap(tuple((b, a) for a, b in self.pairs))


def build_map(a: Sequence, b: Sequence, fixed: Iterable = ()) -> dict | None:
    """The map fixing ``fixed`` and sending a_j to b_j, or None if ill-defined or non-injective."""
    m = {c: c for c in fixed}
    for x, y in zip(a, b):
        if m.setdefault(x, y) != y:
            return None
    if len(set(m.values())) != len(m):
        return None
    return m


def _as_dict(m) -> dict:
    return m.as_dict() if isinstance(m, PartialMap) else dict(m)


def is_partial_isomorphism(S: Structure, m) -> bool:
    """Sort-respecting, injective, preserves and reflects every atom, commutes with functions."""
    m = _as_dict(m)
    if len(set(m.values())) != len(m):
        return False
    for x, y in m.items():
        if S.sort_of(x) != S.sort_of(y):
            return False
    for sym in S.signature.relations:
        if not S.relations[sym.name].preserved_by(m):
            return False
    inv = {y: x for x, y in m.items()}
    for sym in S.signature.functions:
        for src, dst in ((m, inv), (inv, m)):
            pool = list(src)
            for args in itertools.product(pool, repeat=sym.arity):
                if any(S.sort_of(x) != s for x, s in zip(args, sym.profile)):
                    continue
                v = S.apply(sym.name, args)
                if v not in src:
                    continue
                if S.apply(sym.name, tuple(src[x] for x in args)) != src[v]:
                    return False
    return True


def _function_pass(S: Structure, elems: list, frontier: set, on_value):
    """Apply every function to every argument tuple touching ``frontier``."""
    by_sort = defaultdict(list)
    for e in elems:
        by_sort[S.sort_of(e)].append(e)
    for sym in S.signature.functions:
        pools = [by_sort.get(s, []) for s in sym.profile]
        for args in itertools.product(*pools):
            if sym.arity and not any(x in frontier for x in args):
                continue
            on_value(sym.name, args, S.apply(sym.name, args))


def closure(S: Structure, seed: Iterable) -> frozenset:
    """Universe of the substructure generated by ``seed``."""
    elems = list(dict.fromkeys(seed))
    known = set(elems)
    frontier = set(elems)
    first = True
    while frontier or first:
        fresh = []

        def on_value(_name, _args, v):
            if v not in known:
                known.add(v)
                fresh.append(v)

        if first:
            # nullary symbols fire once even when the seed is empty
            for sym in S.signature.functions:
                if sym.arity == 0:
                    on_value(sym.name, (), S.apply(sym.name, ()))
            first = False
        _function_pass(S, elems, frontier, on_value)
        elems.extend(fresh)
        frontier = set(fresh)
    return frozenset(elems)


def generated_substructure(S: Structure, seed: Iterable) -> Structure:
    return S.restrict(closure(S, seed))


def extend_map(S: Structure, base: Mapping) -> dict:
    """Extend ``base`` along function application over the generated substructure.

    Raises ExtensionClash when some element is forced to two images.  The
    result is an isomorphism of generated substructures iff it is injective
    and a partial isomorphism.
    """
    m = dict(base)
    elems = list(m)
    frontier = set(elems)
    first = True
    while frontier or first:
        fresh = []

        def on_value(name, args, v):
            w = S.apply(name, tuple(m[x] for x in args))
            prev = m.get(v)
            if prev is None and v not in m:
                m[v] = w
                fresh.append(v)
            elif prev != w:
                raise ExtensionClash(v, prev, w)

        if first:
            for sym in S.signature.functions:
                if sym.arity == 0:
                    on_value(sym.name, (), S.apply(sym.name, ()))
            first = False
        _function_pass(S, elems, frontier, on_value)
        elems.extend(fresh)
        frontier = set(fresh)
    return m


def _check_sorts(S: Structure, a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise SortMismatch(f"tuples of lengths {len(a)} and {len(b)}")
    for x, y in zip(a, b):
        if S.sort_of(x) != S.sort_of(y):
            raise SortMismatch(f"{x!r} and {y!r} have different sorts")


def qf_type_key(S: Structure, params: Iterable, a: Sequence):
    """Hashable summary of the quantifier-free type of ``a`` over ``params``.

    Relational signatures only.  Equal keys (for the same params) iff equal types.
    """
    params = params if isinstance(params, frozenset) else frozenset(params)
    new: list = []
    pattern = []
    for x in a:
        if x in params:
            pattern.append((0, x))
        else:
            if x not in new:
                new.append(x)
            pattern.append((1, new.index(x), S.sort_of(x)))
    rels = tuple(S.relations[r.name].local_key(params, new) for r in S.signature.relations)
    return tuple(pattern), rels


def qf_type_equal(S: Structure, a: Sequence, b: Sequence, C: Iterable = ()) -> bool:
    a, b = tuple(a), tuple(b)
    _check_sorts(S, a, b)
    C = frozenset(C)
    if S.signature.relational:
        return qf_type_key(S, C, a) == qf_type_key(S, C, b)
    m = build_map(a, b, C)
    if m is None:
        return False
    try:
        m = extend_map(S, m)
    except ExtensionClash:
        return False
    return is_partial_isomorphism(S, m)
