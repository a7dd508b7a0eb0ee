"""Checkers for k-splitting, end-homogeneity and indiscernibility.

Every search here is exhaustive and deterministic: candidate tuples are
enumerated size first, then lexicographically in the structure's element
order, so the same input always yields the same witness or violation.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .report import BudgetExceeded, Report, failed, passed
from .structures import KSetColoring, Structure, qf_type_equal, qf_type_key

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class PartitionedType:
    """tp(a_0; ...; a_{k-1} / B) for explicit blocks a_i and parameter set B."""

    structure: Structure
    blocks: tuple
    params: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))
        object.__setattr__(self, "params", frozenset(self.params))
        if not self.blocks:
            raise ValueError("a partitioned type needs at least one block")
        for x in itertools.chain(self.params, *self.blocks):
            if x not in self.structure:
                raise ValueError(f"{x!r} is not in the universe")

    @property
    def k(self) -> int:
        return len(self.blocks)

    def flat(self) -> tuple:
        return tuple(itertools.chain.from_iterable(self.blocks))


@dataclass(frozen=True)
class SplitWitness:
    b: tuple
    b_prime: tuple
    note: str = ""


@dataclass
class IndexedSequence:
    structure: Structure
    items: list
    base: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        self.items = [tuple(a) for a in self.items]
        self.base = frozenset(self.base)
        if len({len(a) for a in self.items}) > 1:
            raise ValueError("sequence items must have equal length")

    def __len__(self):
        return len(self.items)

    def concat(self, idx: Iterable[int]) -> tuple:
        return tuple(itertools.chain.from_iterable(self.items[i] for i in idx))

    def prefix_params(self, cut: int) -> frozenset:
        return self.base | frozenset(itertools.chain.from_iterable(self.items[:cut]))

    def sub(self, idx: Sequence[int]) -> "IndexedSequence":
        return IndexedSequence(self.structure, [self.items[i] for i in idx], self.base)


class TypeClassifier:
    """Groups tuples by qf-type over a parameter set, caching keys when possible."""

    def __init__(self, S: Structure):
        self.S = S
        self.keyed = S.signature.relational
        self._cache: dict = {}

    def key(self, params: frozenset, a: tuple):
        ck = (params, a)
        hit = self._cache.get(ck)
        if hit is None:
            if len(self._cache) > 200_000:
                self._cache.clear()
            hit = self._cache[ck] = qf_type_key(self.S, params, a)
        return hit

    def equal(self, params: frozenset, a: tuple, b: tuple) -> bool:
        if self.keyed:
            return self.key(params, a) == self.key(params, b)
        return qf_type_equal(self.S, a, b, params)

    def classify(self, params: frozenset, tuples: Sequence[tuple]) -> list[int]:
        """Class id per tuple; ids are assigned in order of first appearance."""
        ids: list[int] = []
        if self.keyed:
            seen: dict = {}
            for a in tuples:
                ids.append(seen.setdefault(self.key(params, a), len(seen)))
            return ids
        reps: list[tuple] = []
        for a in tuples:
            for j, r in enumerate(reps):
                if qf_type_equal(self.S, a, r, params):
                    ids.append(j)
                    break
            else:
                ids.append(len(reps))
                reps.append(a)
        return ids


def _name_of(S: Structure):
    rev = {e: n for n, e in S.names.items()}
    return lambda x: rev.get(x, repr(x))


def _separating_note(S: Structure, params: frozenset, b: tuple, b2: tuple) -> str:
    if not S.signature.relational:
        return "the extended map does not give an isomorphism of generated substructures"
    name = _name_of(S)
    pa, ra = qf_type_key(S, params, b)
    pb, rb = qf_type_key(S, params, b2)
    if pa != pb:
        return "equality pattern differs"
    for sym, ka, kb in zip(S.signature.relations, ra, rb):
        if ka == kb:
            continue
        if isinstance(S.relations[sym.name], KSetColoring):
            return f"{sym.name}: the {sym.name}-classes met by b and b' differ"
        diff = sorted(ka ^ kb, key=repr)[0]
        args = ", ".join(name(v) if tag == 0 else f"y{v}" for tag, v in diff)
        side = "b" if diff in ka else "b'"
        return f"{sym.name}({args}) holds only for {side}"
    return "types differ"


def k_splits_over(pt: PartitionedType, C: Iterable = (), ell: int = 2, cap: int = DEFAULT_CAP,
                  classifier: TypeClassifier | None = None) -> SplitWitness | None:
    """Lex-first pair b, b' from B^m (m <= ell) witnessing k-splitting over C, or None.

    b and b' must agree over C plus every block but one, for each choice of
    omitted block, and disagree over C plus all blocks.
    """
    S = pt.structure
    C = frozenset(C)
    if not C <= pt.params:
        raise ValueError("C must be a subset of the parameter set")
    if ell < 1:
        raise ValueError("ell must be at least 1")
    n = len(pt.params)
    space = sum(n ** (2 * m) for m in range(1, ell + 1))
    if space > cap:
        raise BudgetExceeded("k_splits_over pair enumeration", cap)
    tc = classifier or TypeClassifier(S)
    drop = [C | frozenset(x for j, blk in enumerate(pt.blocks) if j != i for x in blk) for i in range(pt.k)]
    full = C | frozenset(pt.flat())
    for m in range(1, ell + 1):
        cands = list(itertools.product(S.sorted(pt.params), repeat=m))
        if not cands:
            continue
        cols = [tc.classify(p, cands) for p in drop]
        fcol = tc.classify(full, cands)
        groups = defaultdict(list)
        for idx, sig in enumerate(zip(*cols)):
            groups[sig].append(idx)
        best = None
        for members in groups.values():
            first_split = {}
            for idx in members:
                first_split.setdefault(fcol[idx], idx)
            if len(first_split) < 2:
                continue
            for idx in members:
                partner = min(j for c, j in first_split.items() if c != fcol[idx])
                cand = (idx, partner)
                if best is None or cand < best:
                    best = cand
                break
        if best is not None:
            b, b2 = cands[best[0]], cands[best[1]]
            return SplitWitness(b, b2, _separating_note(S, full, b, b2))
    return None


def is_end_homogeneous(seq: IndexedSequence, k: int, classifier: TypeClassifier | None = None) -> Report:
    """At every cut c, all increasing k-tuples from indices >= c share a type over B + a_{<c}."""
    n = len(seq)
    tc = classifier or TypeClassifier(seq.structure)
    checks = 0
    if n < k:
        return passed({"checks": 0}, vacuous=True)
    for cut in range(n - k + 1):
        params = seq.prefix_params(cut)
        ref = None
        for idx in itertools.combinations(range(cut, n), k):
            tup = seq.concat(idx)
            checks += 1
            if ref is None:
                ref = (idx, tup)
            elif not tc.equal(params, ref[1], tup):
                return failed({"cut": cut, "tuple": list(ref[0]), "other": list(idx)},
                              "tuples beyond the cut have different types", {"checks": checks})
    return passed({"checks": checks})


def is_n_indiscernible(seq: IndexedSequence, m: int, classifier: TypeClassifier | None = None) -> Report:
    """Every two increasing m-subsequences share a type over B."""
    if m < 1:
        raise ValueError("m must be at least 1")
    n = len(seq)
    if n < m:
        return passed({"checks": 0}, vacuous=True)
    tc = classifier or TypeClassifier(seq.structure)
    ref = None
    checks = 0
    for idx in itertools.combinations(range(n), m):
        tup = seq.concat(idx)
        checks += 1
        if ref is None:
            ref = (idx, tup)
        elif not tc.equal(seq.base, ref[1], tup):
            return failed({"tuple": list(ref[0]), "other": list(idx)},
                          f"increasing {m}-subsequences differ in type", {"checks": checks})
    return passed({"checks": checks})


def verify_prop_2_2(seq: IndexedSequence, k: int, ell: int = 2, cap: int = DEFAULT_CAP) -> Report:
    """If seq is k-end-homogeneous over B and no tp(a_I / B a_{<i0}) k-splits over B, seq is indiscernible.

    Both hypotheses and the conclusion are evaluated and reported separately;
    the verdict fails only when the hypotheses hold and the conclusion does not.
    """
    n = len(seq)
    tc = TypeClassifier(seq.structure)
    if n < k:
        return passed({"length": n}, vacuous=True, hypothesis_a="pass", hypothesis_b="pass", conclusion="pass")
    hyp_a = is_end_homogeneous(seq, k, tc)
    split_at = None
    splits_checked = 0
    for idx in itertools.combinations(range(n), k):
        pt = PartitionedType(seq.structure, [seq.items[i] for i in idx], seq.prefix_params(idx[0]))
        splits_checked += 1
        w = k_splits_over(pt, seq.base, ell, cap, tc)
        if w is not None:
            split_at = (idx, w)
            break
    concl_fail = None
    for m in range(1, n + 1):
        r = is_n_indiscernible(seq, m, tc)
        if not r:
            concl_fail = (m, r.first_violation)
            break
    stats = {"length": n, "split_checks": splits_checked, "end_homogeneity_checks": hyp_a.stats["checks"]}
    details = {
        "hypothesis_a": hyp_a.status,
        "hypothesis_b": "pass" if split_at is None else "fail",
        "conclusion": "pass" if concl_fail is None else "fail",
    }
    if not hyp_a:
        details["hypothesis_a_violation"] = hyp_a.first_violation
    if split_at is not None:
        details["hypothesis_b_violation"] = {"indices": list(split_at[0]), "b": split_at[1].b,
                                             "b_prime": split_at[1].b_prime, "note": split_at[1].note}
    if concl_fail is not None:
        details["conclusion_violation"] = {"m": concl_fail[0], **concl_fail[1]}
    if hyp_a and split_at is None and concl_fail is not None:
        return failed({"m": concl_fail[0], **concl_fail[1]["indices"]},
                      "hypotheses hold but the sequence is not indiscernible", stats, **details)
    return passed(stats, **details)


def _extends(seq: IndexedSequence, chosen: list[int], j: int, k: int, refs: dict, tc: TypeClassifier) -> bool:
    """Would chosen + [j] stay k-end-homogeneous?  Records new reference tuples on success."""
    X = chosen + [j]
    pos = len(chosen)
    new_refs = {}
    for cut in range(len(X) - k + 1):
        params = seq.base | frozenset(
            itertools.chain.from_iterable(seq.items[i] for i in X[:cut]))
        ref = refs.get(cut) or new_refs.get(cut)
        for rest in itertools.combinations(range(cut, pos), k - 1):
            tup = seq.concat([X[r] for r in rest] + [j])
            if ref is None:
                ref = new_refs[cut] = tup
            elif not tc.equal(params, ref, tup):
                return False
    refs.update(new_refs)
    return True


def end_homogenize(seq: IndexedSequence, k: int = 1) -> list[int]:
    """Indices of a k-end-homogeneous subsequence.

    k = 1: keep the largest qf-type class over B plus the chosen prefix, take
    its first element, repeat inside that class.  k >= 2: the same majority
    step with candidates profiled by the types of the k-tuples they would
    complete, followed by a left-to-right repair pass that only keeps
    indices preserving end-homogeneity.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n = len(seq)
    if n == 0:
        return []
    tc = TypeClassifier(seq.structure)
    chosen: list[int] = []
    remaining = list(range(n))
    while remaining:
        params = seq.base | frozenset(
            itertools.chain.from_iterable(seq.items[i] for i in chosen))
        if k == 1 or len(chosen) < k - 1:
            profile = tc.classify(params, [seq.items[j] for j in remaining])
        else:
            profile = _profiles(seq, chosen, remaining, k, tc)
        counts = defaultdict(int)
        for p in profile:
            counts[p] += 1
        best = max(counts, key=lambda p: (counts[p], -profile.index(p)))
        cls = [j for j, p in zip(remaining, profile) if p == best]
        chosen.append(cls[0])
        remaining = cls[1:]
    if k == 1:
        return chosen
    kept: list[int] = []
    refs: dict = {}
    for j in chosen:
        if _extends(seq, kept, j, k, refs, tc):
            kept.append(j)
    return kept


def _profiles(seq, chosen, remaining, k, tc) -> list:
    # profile of j: the types of every k-tuple it would close off, at every cut;
    # without cached keys each candidate is its own class and the repair pass does the work
    if not tc.keyed:
        return list(range(len(remaining)))
    table: dict = {}
    out = []
    for j in remaining:
        sig = []
        for cut in range(len(chosen) + 1):
            params = seq.base | frozenset(itertools.chain.from_iterable(seq.items[i] for i in chosen[:cut]))
            for rest in itertools.combinations(chosen[cut:], k - 1):
                sig.append(tc.key(params, seq.concat(list(rest) + [j])))
        out.append(table.setdefault(tuple(sig), len(table)))
    return out


def find_splitting_chain(S: Structure, blocks: Sequence, stages: Sequence[Iterable], ell: int = 2,
                         cap: int = DEFAULT_CAP) -> Report:
    """Test tp(blocks / top stage) for k-splitting over each stage in turn."""
    stages = [frozenset(s) for s in stages]
    if not stages:
        return passed({"stages": 0}, chain_length=0)
    for lo, hi in zip(stages, stages[1:]):
        if not lo <= hi:
            raise ValueError("stages must form an increasing chain")
    pt = PartitionedType(S, blocks, stages[-1])
    tc = TypeClassifier(S)
    witnesses = []
    for beta, stage in enumerate(stages):
        w = k_splits_over(pt, stage, ell, cap, tc)
        if w is None:
            r = failed({"stage": beta}, "no splitting witness over this stage",
                       {"stages": len(stages)}, chain_length=beta)
            r.witnesses = witnesses
            return r
        witnesses.append({"stage": beta, "b": w.b, "b_prime": w.b_prime, "note": w.note})
    r = passed({"stages": len(stages)}, chain_length=len(stages))
    r.witnesses = witnesses
    return r


def minimal_nonsplitting_base(pt: PartitionedType, ell: int = 2, cap: int | None = None,
                              budget: int = DEFAULT_CAP) -> frozenset | None:
    """First C (size-then-lex) with |C| <= cap over which pt does not k-split."""
    pool = pt.structure.sorted(pt.params)
    cap = len(pool) if cap is None else cap
    if cap > len(pool):
        raise ValueError("cap exceeds |B|")
    tc = TypeClassifier(pt.structure)
    for size in range(cap + 1):
        for C in itertools.combinations(pool, size):
            if k_splits_over(pt, C, ell, budget, tc) is None:
                return frozenset(C)
    return None
