"""Finite-height truncation of the splitting-chain model built from copies of 2^{<ω}.

Elements are nodes ``(eta, bits)``: ``eta`` names the tree P_eta (a binary
string of length <= m) and ``bits`` is a binary string of length
< L * (Bc + 1), the stand-in for a sequence of length < ω·Bc + ω.  Heights
that are multiples of L play the role of limit ordinals; every other
positive height is a successor height.

The signature is single-sorted.  Unary ``P:<eta>`` picks out each tree,
``lt`` is the proper-prefix order inside a tree, and the functions are

* ``meet(x, y)``: longest common prefix when x, y share a tree, else x;
* ``suc(x, y)``: the prefix of y one longer than x when x is a proper prefix
  of y in the same tree and that prefix is not at a limit height, else y;
* ``G:<eta>:<i>(x)``: the transfer map from P_eta to P_{eta i}.  It is the
  identity away from successor nodes of P_eta.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property

from .report import ExtensionClash, ParameterTooSmall, Report, failed, passed
from .structures import PredicateRelation, RelationSymbol, FunctionSymbol, Signature, Structure

Node = tuple  # (eta, bits)


@dataclass(frozen=True)
class TermChainResult:
    values: tuple
    phi: bool

    def to_dict(self) -> dict:
        return {"values": [list(v) for v in self.values], "phi": self.phi}


class _Nodes:
    """Lazy container of every node of height < bound across all trees."""

    def __init__(self, M: "ModelM", bound: int):
        self.M = M
        self.bound = bound

    def __contains__(self, x) -> bool:
        return (isinstance(x, tuple) and len(x) == 2 and x[0] in self.M.index_set
                and isinstance(x[1], str) and len(x[1]) < self.bound and set(x[1]) <= {"0", "1"})

    def __len__(self) -> int:
        return len(self.M.indices) * ((1 << self.bound) - 1)

    def __iter__(self):
        for eta in self.M.indices:
            for h in range(self.bound):
                for bits in itertools.product("01", repeat=h):
                    yield (eta, "".join(bits))


@dataclass(frozen=True)
class ModelM:
    k: int
    L: int
    Bc: int
    m: int
    height: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "height", self.L * (self.Bc + 1))

    # -- index tree and nodes -------------------------------------------------

    @cached_property
    def indices(self) -> tuple:
        return tuple("".join(p) for d in range(self.m + 1) for p in itertools.product("01", repeat=d))

    @cached_property
    def index_set(self) -> frozenset:
        return frozenset(self.indices)

    def is_node(self, x) -> bool:
        return x in _Nodes(self, self.height)

    def is_successor(self, x: Node) -> bool:
        return len(x[1]) % self.L != 0

    # -- named elements -------------------------------------------------------

    def a(self, i: int) -> Node:
        return ("0" * i, "0" * (self.L * self.Bc))

    def a_prime(self) -> Node:
        return ("0" * (self.k - 1), "1" * (self.L * self.Bc))

    def c(self, i: int, beta: int) -> Node:
        return ("0" * i, "0" * (self.L * beta) + "1")

    def b(self, i: int, beta: int) -> Node:
        bits = "0" * (self.L * beta) + "1"
        return ("0" * i, bits + "1" * (self.L * self.Bc - len(bits)))

    def last_level(self, beta: int) -> Node:
        """The image of c_{k-2,beta} under the last transfer map: a_{k-1} or a'_{k-1} by parity."""
        return self.a(self.k - 1) if beta % 2 == 0 else self.a_prime()

    def names(self) -> dict:
        out = {f"a{i}": self.a(i) for i in range(self.k)}
        out[f"a'{self.k - 1}"] = self.a_prime()
        for i in range(self.k - 1):
            for beta in range(self.Bc):
                out[f"c{i},{beta}"] = self.c(i, beta)
                out[f"b{i},{beta}"] = self.b(i, beta)
        return out

    # -- functions ------------------------------------------------------------

    def meet(self, x: Node, y: Node) -> Node:
        if x[0] != y[0]:
            return x
        s, t = x[1], y[1]
        n = 0
        for p, q in zip(s, t):
            if p != q:
                break
            n += 1
        return (x[0], s[:n])

    def suc(self, x: Node, y: Node) -> Node:
        s, t = x[1], y[1]
        if x[0] == y[0] and len(s) < len(t) and t.startswith(s) and (len(s) + 1) % self.L:
            return (y[0], t[: len(s) + 1])
        return y

    def G(self, eta: str, i: str, x: Node) -> Node:
        if x[0] != eta or not self.is_successor(x):
            return x
        child = eta + i
        j = len(eta)
        if i == "0" and eta == "0" * j and j <= self.k - 2:
            hit = self._c_extension(x[1])
            if hit is not None:
                return self.b(j + 1, hit) if j < self.k - 2 else self.last_level(hit)
        return (child, "")

    def _c_extension(self, s: str) -> int | None:
        """beta if s extends 0^{L beta} 1 below height L(beta + 1), else None."""
        L = self.L
        beta = len(s) // L
        if beta >= self.Bc or s[: L * beta] != "0" * (L * beta) or s[L * beta] != "1":
            return None
        return beta

    def transfers(self) -> list[tuple[str, str]]:
        return [(eta, i) for eta in self.indices if len(eta) < self.m for i in "01"]

    def images(self, x: Node) -> list[Node]:
        """Values of every transfer map at x that can differ from x."""
        if len(x[0]) >= self.m:
            return []
        return [self.G(x[0], i, x) for i in "01"]

    # -- structure view -------------------------------------------------------

    def signature(self) -> Signature:
        rels = tuple(RelationSymbol(f"P:{eta}", 1, ("node",)) for eta in self.indices)
        rels += (RelationSymbol("lt", 2, ("node", "node")),)
        fns = (FunctionSymbol("meet", 2, ("node", "node"), "node"),
               FunctionSymbol("suc", 2, ("node", "node"), "node"))
        fns += tuple(FunctionSymbol(f"G:{eta}:{i}", 1, ("node",), "node") for eta, i in self.transfers())
        return Signature(("node",), rels, fns)

    def as_structure(self) -> Structure:
        rels = {f"P:{eta}": PredicateRelation(1, lambda x, eta=eta: x[0] == eta) for eta in self.indices}
        rels["lt"] = PredicateRelation(2, lambda x, y: x[0] == y[0] and len(x[1]) < len(y[1])
                                       and y[1].startswith(x[1]))
        fns = {"meet": self.meet, "suc": self.suc}
        for eta, i in self.transfers():
            fns[f"G:{eta}:{i}"] = lambda x, eta=eta, i=i: self.G(eta, i, x)
        return Structure(self.signature(), {"node": _Nodes(self, self.height)}, rels, fns,
                         names=self.names(), order_key=node_order)

    # -- M_beta ---------------------------------------------------------------

    def in_ball(self, x: Node, beta: int) -> bool:
        return len(x[1]) < self.L * beta

    def ball_images(self, beta: int) -> frozenset:
        """Transfer-map values on the height ball that leave it."""
        if beta == 0:
            return frozenset()
        out = {self.b(j + 1, g) for j in range(self.k - 2) for g in range(beta)}
        out |= {self.last_level(g) for g in range(min(beta, 2))}
        return frozenset(out)

    def saturate(self, beta: int, seeds: Iterable[Node]) -> frozenset:
        """Elements outside the height ball in the substructure generated by ball(beta) + seeds.

        Any function value with an argument in the ball lies in the ball or
        equals an argument, or is one of ball_images, so closing the
        out-of-ball part under itself is enough.
        """
        out = {x for x in itertools.chain(seeds, self.ball_images(beta)) if not self.in_ball(x, beta)}
        frontier = list(out)
        while frontier:
            fresh = []

            def add(v):
                if not self.in_ball(v, beta) and v not in out:
                    out.add(v)
                    fresh.append(v)

            for x in frontier:
                for v in self.images(x):
                    add(v)
                for y in list(out):
                    if y[0] != x[0]:
                        continue
                    for v in (self.meet(x, y), self.meet(y, x), self.suc(x, y), self.suc(y, x)):
                        add(v)
            frontier = fresh
        return frozenset(out)

    def m_beta_extras(self, beta: int) -> frozenset:
        return self.saturate(beta, ())


def node_order(x: Node):
    return (len(x[0]), x[0], len(x[1]), x[1])


def build_M(k: int, L: int, Bc: int, m: int | None = None) -> ModelM:
    m = k if m is None else m
    if k < 2:
        raise ParameterTooSmall("k must be at least 2")
    if L < 2:
        raise ParameterTooSmall("L must be at least 2")
    if Bc < 2 or Bc % 2:
        raise ParameterTooSmall("Bc must be even and at least 2")
    if m < k:
        raise ParameterTooSmall("index depth m must be at least k")
    return ModelM(k, L, Bc, m)


def m_beta(M: ModelM, beta: int) -> _Nodes:
    """Every node of height < L * beta, across all trees."""
    if not 0 <= beta <= M.Bc:
        raise ValueError("beta out of range")
    return _Nodes(M, M.L * beta)


def eval_phi(M: ModelM, y: Node, xs: tuple | None = None) -> TermChainResult:
    """f_0 .. f_{k-2} with x_i = a_i by default, and phi = (f_{k-2} == x_{k-1})."""
    xs = tuple(M.a(i) for i in range(M.k)) if xs is None else tuple(xs)
    values = []
    cur = y
    for i in range(M.k - 1):
        eta = "0" * i
        cur = M.G(eta, "0", M.suc(M.meet(xs[i], cur), cur))
        values.append(cur)
    return TermChainResult(tuple(values), values[-1] == xs[M.k - 1])


def _seeds(M: ModelM, i: int, gamma: int) -> list[Node]:
    return [M.a(j) for j in range(M.k) if j != i] + [M.b(0, gamma)]


def lemma_B1_list(M: ModelM, i: int, beta: int, gamma: int) -> frozenset:
    """The claimed out-of-ball elements of the substructure generated by M_beta, the a_j (j != i)
    and b_{0,gamma}."""
    L = M.L
    out = set(M.m_beta_extras(beta))
    out.update(M.a(j) for j in range(M.k) if j != i)
    for j in range(i):
        eta = "0" * j
        base = "0" * (L * gamma)
        for n in range(L):
            out.add((eta, base + "0" * n))
            out.add((eta, base + "1" * n))
    for j in range(i + 1):
        out.add(M.b(j, gamma) if j < M.k - 1 else M.last_level(gamma))
    return frozenset(x for x in out if not M.in_ball(x, beta))


def verify_lemma_B1(M: ModelM, i: int, beta: int, gamma: int) -> Report:
    if not (0 <= i < M.k and 0 <= beta <= gamma < M.Bc):
        raise ValueError("need i < k and beta <= gamma < Bc")
    got = M.saturate(beta, _seeds(M, i, gamma))
    want = lemma_B1_list(M, i, beta, gamma)
    stats = {"generated": len(got), "listed": len(want)}
    if got != want:
        extra = sorted(got - want, key=node_order)
        missing = sorted(want - got, key=node_order)
        return failed({"i": i, "beta": beta, "gamma": gamma},
                      "generated substructure differs from the list", stats,
                      unlisted=extra, not_generated=missing)
    return passed(stats)


def _extend_symbolic(M: ModelM, beta: int, base: dict) -> dict:
    """Close a map (identity on the ball) along the functions restricted to the out-of-ball part dom."""
    m = dict(base)
    frontier = list(base)
    known = set(base)

    def put(src, dst):
        if M.in_ball(src, beta):
            if dst != src:
                raise ExtensionClash(src, src, dst)
            return
        prev = m.get(src)
        if prev is None:
            m[src] = dst
            known.add(src)
            fresh.append(src)
        elif prev != dst:
            raise ExtensionClash(src, prev, dst)

    while frontier:
        fresh: list = []
        for x in frontier:
            for (eta, t) in ([(x[0], "0"), (x[0], "1")] if len(x[0]) < M.m else []):
                put(M.G(eta, t, x), M.G(eta, t, m[x]))
            for y in list(known):
                for f in (M.meet, M.suc):
                    put(f(x, y), f(m[x], m[y]))
                    put(f(y, x), f(m[y], m[x]))
        frontier = fresh
    return m


def verify_lemma_B2(M: ModelM, i: int, beta: int, gamma: int, gamma2: int) -> Report:
    """Identity on M_beta and a_j (j != i) plus b_{0,gamma} -> b_{0,gamma2} extends to an isomorphism
    of the generated substructures."""
    if not (0 <= i < M.k and beta <= gamma < M.Bc and beta <= gamma2 < M.Bc and beta >= 0):
        raise ValueError("need i < k and beta <= gamma, gamma2 < Bc")
    src = M.saturate(beta, _seeds(M, i, gamma))
    dst = M.saturate(beta, _seeds(M, i, gamma2))
    fixed = M.m_beta_extras(beta) | {M.a(j) for j in range(M.k) if j != i}
    base = {x: x for x in fixed if not M.in_ball(x, beta)}
    b, b2 = M.b(0, gamma), M.b(0, gamma2)
    where = {"i": i, "beta": beta, "gamma": gamma, "gamma2": gamma2}
    if base.get(b, b2) != b2:
        return failed(where, f"{b} is fixed but must map to {b2}")
    base[b] = b2
    try:
        m = _extend_symbolic(M, beta, base)
    except ExtensionClash as exc:
        return failed({**where, "element": exc.element, "images": [exc.first, exc.second]},
                      "closure forces two images for one element")
    stats = {"domain": len(src), "range": len(dst)}
    if set(m) != src or set(m.values()) != dst:
        return failed(where, "extended map is not onto the target substructure", stats)
    if len(set(m.values())) != len(m):
        return failed(where, "extended map is not injective", stats)
    h = M.L * beta - 1
    for x, y in m.items():
        # functions mixing the ball and the rest only see the tree and the first L*beta - 1 bits
        if x[0] != y[0] or (h > 0 and x[1][:h] != y[1][:h]) or M.in_ball(y, beta):
            return failed({**where, "element": x, "image": y}, "map disagrees with the ball", stats)
    for x, y in itertools.product(m, repeat=2):
        lt = x[0] == y[0] and len(x[1]) < len(y[1]) and y[1].startswith(x[1])
        mx, my = m[x], m[y]
        if lt != (mx[0] == my[0] and len(mx[1]) < len(my[1]) and my[1].startswith(mx[1])):
            return failed({**where, "pair": [x, y]}, "tree order not preserved", stats)
    return passed(stats)


def verify_splitting_chain_B(M: ModelM) -> Report:
    """For each even beta < Bc - 1: b_{0,beta} and b_{0,beta+1} agree over M_beta and all but one
    a_i (for each i), yet phi separates them."""
    stages = []
    first_bad = None
    for beta in range(0, M.Bc - 1, 2):
        b2 = [verify_lemma_B2(M, i, beta, beta, beta + 1) for i in range(M.k)]
        p0, p1 = eval_phi(M, M.b(0, beta)).phi, eval_phi(M, M.b(0, beta + 1)).phi
        ok = all(b2) and p0 != p1
        entry = {"beta": beta, "witness": [M.b(0, beta), M.b(0, beta + 1)], "phi": [p0, p1],
                 "lemma_B2": [r.status for r in b2], "status": "pass" if ok else "fail"}
        stages.append(entry)
        if not ok and first_bad is None:
            bad_i = next((i for i, r in enumerate(b2) if not r), None)
            first_bad = {"beta": beta, "i": bad_i,
                         "detail": b2[bad_i].first_violation if bad_i is not None else "phi does not separate"}
    chain = next((n for n, s in enumerate(stages) if s["status"] == "fail"), len(stages))
    stats = {"stages_checked": len(stages), "chain_length": chain}
    if first_bad is not None:
        r = failed(first_bad, "stage fails to split", stats)
    else:
        r = passed(stats)
    r.witnesses = stages
    return r
