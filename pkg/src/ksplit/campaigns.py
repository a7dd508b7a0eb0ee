"""Named verification campaigns: parameter defaults, runners and report envelopes."""

from __future__ import annotations

import csv
import io
import itertools
import json
import random
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .detectors import (
    IndexedSequence,
    PartitionedType,
    end_homogenize,
    find_splitting_chain,
    is_end_homogeneous,
    k_splits_over,
    minimal_nonsplitting_base,
    verify_prop_2_2,
)
from .gallery import (
    build_equiv_witness,
    build_hypergraph_witness,
    build_ipk_witness,
    build_K_config,
    extend_equiv_random,
    ipk_pattern,
    nonsplitting_base_equiv,
    random_equiv_k,
    random_hypergraph,
    validate_equiv_k0,
    validate_tk,
)
from .kaplan_shelah import (
    build_M,
    eval_phi,
    verify_lemma_B1,
    verify_lemma_B2,
    verify_splitting_chain_B,
)
from .report import InvalidParams, Report, failed, jsonable, passed
from .structures import Structure, qf_type_equal
from .trees import FiniteTree, all_downright_closed, verify_fX_claim, verify_lemma_A4


def _row(name: str, report_or_ok, **extra) -> dict:
    ok = bool(report_or_ok)
    row = {"check": name, "status": "pass" if ok else "fail", **extra}
    if isinstance(report_or_ok, Report) and not ok:
        row["violation"] = report_or_ok.first_violation
    return row


def _summarize(rows: list[dict], stats: dict | None = None, **details) -> Report:
    stats = {"checks": len(rows), "failures": sum(r["status"] == "fail" for r in rows), **(stats or {})}
    bad = next((r for r in rows if r["status"] == "fail"), None)
    if bad is None:
        return passed(stats, checks=rows, **details)
    return failed({"check": bad["check"]}, "check failed", stats, checks=rows, **details)


def _map(fn: Callable, items: list, jobs: int) -> list:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- prop-2-2 -------------------------------------------------------------------


def indiscernibility_instance(seed: int, idx: int, max_len: int = 8, ell: int = 2) -> dict:
    """One seeded random instance: an Equiv_2 model (even idx) or a 3-uniform hypergraph (odd idx)."""
    rng = random.Random(f"prop-2-2:{seed}:{idx}")
    k = 2 + (idx // 2) % 2
    n = rng.randint(max(k + 1, 4), 9)
    if idx % 2 == 0:
        S = random_equiv_k(n, 2, rng.choice([1, 2, 3]), rng.randrange(1 << 30))
        kind = "equiv2"
    else:
        S = random_hypergraph(n, 3, rng.choice([0.0, 0.3, 1.0]), rng.randrange(1 << 30))
        kind = "hypergraph"
    elems = list(range(n))
    rng.shuffle(elems)
    base = elems[: rng.randint(0, 1)]
    seq = IndexedSequence(S, [(x,) for x in elems[len(base):][:max_len]], base)
    if rng.random() < 0.5:
        seq = seq.sub(end_homogenize(seq, k))
    r = verify_prop_2_2(seq, k, ell)
    hyp = r.details["hypothesis_a"] == "pass" and r.details["hypothesis_b"] == "pass"
    return {"idx": idx, "kind": kind, "k": k, "length": len(seq), "hypotheses": hyp,
            "conclusion": r.details["conclusion"], "status": r.status}


def run_prop_2_2(instances: int = 200, max_len: int = 8, ell: int = 2, seed: int = 0, jobs: int = 1) -> Report:
    results = _map(_IndiscernibilityJob(seed, max_len, ell), list(range(instances)), jobs)
    rows = [_row(f"instance {r['idx']}", r["status"] == "pass", **r) for r in results]
    stats = {"instances": instances, "hypotheses_hold": sum(r["hypotheses"] for r in results),
             "counterexamples": sum(r["status"] == "fail" for r in results)}
    return _summarize(rows, stats)


@dataclass(frozen=True)
class _IndiscernibilityJob:
    seed: int
    max_len: int
    ell: int

    def __call__(self, idx: int) -> dict:
        return indiscernibility_instance(self.seed, idx, self.max_len, self.ell)


# -- prop-5-4 / hypergraph -------------------------------------------------------


def equiv_chain(k: int, N: int, ell: int = 2) -> Report:
    S, t = build_equiv_witness(k, N)
    blocks = [(t[f"a{j}"],) for j in range(2 * k - 2)]
    stages = [[t[f"{x}{i}"] for i in range(beta) for x in ("b", "c", "b'", "c'")] for beta in range(N)]
    top = [e for e in S.elements() if (e,) not in blocks]
    # the last stage list only fixes the parameter set B; the chain covers beta < N
    r = find_splitting_chain(S, blocks, stages + [top], ell)
    return r


def run_prop_5_4(k: int = 2, N: int = 4, ell: int = 2, seed: int = 0) -> Report:
    r = equiv_chain(k, N, ell)
    length = r.details["chain_length"]
    rows = [_row(f"stage {beta}", beta < length) for beta in range(N)]
    rows.append(_row("final stage B does not split", length == N))
    rows.append(_row("witness validates", validate_equiv_k0(build_equiv_witness(k, N)[0])))
    return _summarize(rows, {"chain_length": min(length, N)}, witnesses=r.witnesses)


def hypergraph_chain(k: int, N: int) -> Report:
    S, t = build_hypergraph_witness(k, N)
    blocks = [(t[f"a{j}"],) for j in range(k - 1)]
    stages = [[t[f"{x}{i}"] for i in range(beta) for x in ("b", "b'")] for beta in range(N + 1)]
    return find_splitting_chain(S, blocks, stages, 1)


def run_hypergraph(k: int = 3, N: int = 4, seed: int = 0) -> Report:
    r = hypergraph_chain(k, N)
    length = r.details["chain_length"]
    rows = [_row(f"stage {beta}", beta < length) for beta in range(N)]
    rows.append(_row("full parameter set does not split", length == N))
    return _summarize(rows, {"chain_length": min(length, N)}, witnesses=r.witnesses)


# -- prop-5-5 --------------------------------------------------------------------


def recipe_instance(k: int, N: int, seed: int, ell: int = 3, search_ell: int = 2, cap: int = 10**8) -> dict:
    S, t = build_equiv_witness(k, N)
    S, t = extend_equiv_random(S, [f"a{2 * k - 2}"], seed)
    blocks = [(t[f"a{j}"],) for j in range(2 * k - 1)]
    B = [e for e in S.elements() if (e,) not in blocks]
    C = nonsplitting_base_equiv(S, blocks, B)
    pt = PartitionedType(S, blocks, B)
    w = k_splits_over(pt, C, ell, cap)
    minimal = minimal_nonsplitting_base(pt, search_ell, len(C))
    return {"seed": seed, "size": len(S), "recipe": sorted(C), "no_split": w is None,
            "minimal": None if minimal is None else sorted(minimal),
            "within_bound": minimal is not None and len(minimal) <= len(C),
            "within_recipe": minimal is not None and minimal <= C}


def run_prop_5_5(k: int = 2, N: int = 3, instances: int = 8, ell: int = 3, seed: int = 0) -> Report:
    rows = []
    for s in range(seed, seed + instances):
        r = recipe_instance(k, N, s, ell)
        rows.append(_row(f"seed {s}: no split over recipe", r["no_split"], recipe=r["recipe"], size=r["size"]))
        rows.append(_row(f"seed {s}: minimal base within size bound", r["within_bound"], minimal=r["minimal"]))
    return _summarize(rows)


# -- prop-5-7 / prop-6-2 ---------------------------------------------------------


def run_prop_5_7(k: int = 2, n: int = 3, seed: int = 0) -> Report:
    rows = []
    grid = list(itertools.product(range(n), repeat=k - 1))
    for mask in range(1 << len(grid)):
        X = {g for b, g in enumerate(grid) if mask >> b & 1}
        S, _ = build_ipk_witness(k, n, X)
        rows.append(_row(f"X={sorted(X)}", ipk_pattern(S, k, n) == X and bool(validate_equiv_k0(S))))
    return _summarize(rows)


def K_claims(k: int, ell: int) -> list[dict]:
    S, t = build_K_config(k, ell)
    rows = [_row("validate_tk", validate_tk(S, k))]
    a = [t[f"a{i}"] for i in range(1, k + 1)]
    for j in range(ell):
        prior = [t[f"{x}{m}"] for m in range(j) for x in "bc"]
        for drop in range(k):
            C = prior + a[:drop] + a[drop + 1:]
            rows.append(_row(f"j={j} without a{drop + 1}", qf_type_equal(S, (t[f"b{j}"],), (t[f"c{j}"],), C)))
        rows.append(_row(f"j={j} full a-set separates",
                         not qf_type_equal(S, (t[f"b{j}"],), (t[f"c{j}"],), prior + a)))
    return rows


def run_prop_6_2(k: int = 2, ell: int = 3, seed: int = 0) -> Report:
    return _summarize(K_claims(k, ell))


# -- lemma-A4 / lemma-A2 ---------------------------------------------------------


def run_lemma_A4(b: int = 3, d: int = 3, seed: int = 0) -> Report:
    rows = [_row(f"b={bb} d={dd}", verify_lemma_A4(FiniteTree(bb, dd)))
            for bb in range(1, b + 1) for dd in range(d + 1)]
    return _summarize(rows)


def run_lemma_A2(n: int = 4, seed: int = 0) -> Report:
    rows = []
    for size in range(n + 1):
        grids = all_downright_closed(range(size))
        bad = [g for g in grids if not verify_fX_claim(g)]
        rows.append(_row(f"|L|={size}", not bad, grids=len(grids)))
    return _summarize(rows)


# -- appendix-B ------------------------------------------------------------------


def chain_model_rows(k: int, L: int, Bc: int, m: int | None = None) -> tuple[list[dict], Report]:
    M = build_M(k, L, Bc, m)
    rows = []
    for beta in range(Bc):
        res = eval_phi(M, M.b(0, beta))
        rows.append(_row(f"phi parity beta={beta}", res.phi == (beta % 2 == 0)))
        want = [M.b(i + 1, beta) for i in range(k - 2)] + [M.last_level(beta)]
        inter = list(res.values) == want
        rows.append(_row(f"f_i intermediates beta={beta}", inter))
    b1 = [(i, beta, g) for i in range(k) for beta in range(Bc) for g in range(beta, Bc)]
    bad1 = [x for x in b1 if not verify_lemma_B1(M, *x)]
    rows.append(_row("verify_lemma_B1 grid", not bad1, cases=len(b1), failing=len(bad1),
                     first=list(bad1[0]) if bad1 else None))
    b2 = [(i, beta, g, h) for i in range(k) for beta in range(Bc)
          for g in range(beta, Bc) for h in range(beta, Bc)]
    bad2 = [x for x in b2 if not verify_lemma_B2(M, *x)]
    rows.append(_row("verify_lemma_B2 grid", not bad2, cases=len(b2), failing=len(bad2),
                     first=list(bad2[0]) if bad2 else None))
    chain = verify_splitting_chain_B(M)
    rows.append(_row("splitting chain", chain, chain_length=chain.stats["chain_length"],
                     expected=len(range(0, Bc - 1, 2))))
    return rows, chain


def run_appendix_B(k: int = 2, L: int = 2, Bc: int = 4, m: int = 0, seed: int = 0) -> Report:
    rows, chain = chain_model_rows(k, L, Bc, m or None)
    r = _summarize(rows, {"chain_length": chain.stats["chain_length"]})
    r.witnesses = chain.witnesses
    return r


# -- extraction / fuzz -----------------------------------------------------------


def run_extraction(n: int = 8, k: int = 1, arity: int = 2, colors: int = 2, instances: int = 10,
                   seed: int = 0) -> Report:
    rows = []
    for s in range(seed, seed + instances):
        S = random_equiv_k(n, arity, colors, s)
        seq = IndexedSequence(S, [(x,) for x in range(n)])
        X = end_homogenize(seq, k)
        rows.append(_row(f"seed {s}", is_end_homogeneous(seq.sub(X), k), indices=X))
    return _summarize(rows)


def check_structure(S: Structure) -> list[dict]:
    rows = [_row("canonical JSON round trip", Structure.from_json(S.to_json()).to_json() == S.to_json())]
    names = {r.name for r in S.signature.relations}
    if len(names) == 1 and S.signature.relations[0].arity % 2 == 0 and "E" in names:
        rows.append(_row("Equiv_k axioms", validate_equiv_k0(S)))
    elif {"lt", "ltk", "R"} <= names:
        k = S.signature.relation("R").arity - 1
        rows.append(_row("T_k axioms", validate_tk(S, k)))
    return rows


def run_fuzz(instances: int = 20, n: int = 6, structure: str = "", config: str = "", seed: int = 0) -> Report:
    rows = []
    if structure:
        with open(structure) as fh:
            try:
                S = Structure.from_json(fh.read())
            except (ValueError, KeyError, TypeError) as exc:
                return failed({"file": structure}, f"structure file rejected: {exc}")
        rows += check_structure(S)
    suite = [{"kind": "equiv-random"}, {"kind": "hypergraph-random"}]
    if config:
        with open(config) as fh:
            suite = json.load(fh)["suite"]
    for s in range(seed, seed + instances):
        for entry in suite:
            accepted = GENERATORS.get(entry["kind"], ({},))[0]
            params = {key: v for key, v in (("n", n), ("seed", s)) if key in accepted}
            params.update((key, v) for key, v in entry.items() if key != "kind")
            S = generate(entry["kind"], params)
            rows += [dict(r, check=f"{entry['kind']} seed {s}: {r['check']}") for r in check_structure(S)]
    return _summarize(rows)


# -- generators ------------------------------------------------------------------


GENERATORS: dict[str, tuple[dict, Callable]] = {
    "equiv-random": ({"n": 8, "k": 2, "colors": 3, "seed": 0},
                     lambda p: random_equiv_k(p["n"], p["k"], p["colors"], p["seed"])),
    "equiv-witness": ({"k": 2, "N": 4}, lambda p: build_equiv_witness(p["k"], p["N"])[0]),
    "K-config": ({"k": 2, "ell": 3}, lambda p: build_K_config(p["k"], p["ell"])[0]),
    "hypergraph-random": ({"n": 8, "k": 3, "p": 0.3, "seed": 0},
                          lambda p: random_hypergraph(p["n"], p["k"], p["p"], p["seed"])),
    "hypergraph-witness": ({"k": 3, "N": 4}, lambda p: build_hypergraph_witness(p["k"], p["N"])[0]),
    "ipk-witness": ({"k": 2, "n": 3, "X": ""},
                    lambda p: build_ipk_witness(p["k"], p["n"], _parse_X(p["X"]))[0]),
}


def _parse_X(text) -> list:
    if isinstance(text, (list, set, tuple)):
        return list(text)
    text = str(text).strip()
    if not text:
        return []
    return [tuple(int(v) for v in part.split(",")) for part in text.split(";")]


def _check_params(defaults: dict, params: dict, what: str) -> dict:
    unknown = set(params) - set(defaults)
    if unknown:
        raise InvalidParams(f"{what}: unknown parameters {sorted(unknown)}")
    out = dict(defaults)
    for key, v in params.items():
        d = defaults[key]
        try:
            out[key] = type(d)(v) if not isinstance(d, str) else v
        except (TypeError, ValueError):
            raise InvalidParams(f"{what}: {key}={v!r} is not a {type(d).__name__}") from None
    return out


def generate(kind: str, params: dict) -> Structure:
    if kind not in GENERATORS:
        raise InvalidParams(f"unknown generator {kind!r}")
    defaults, fn = GENERATORS[kind]
    try:
        return fn(_check_params(defaults, params, kind))
    except ValueError as exc:
        raise InvalidParams(f"{kind}: {exc}") from None


# -- campaigns -------------------------------------------------------------------


TARGETS: dict[str, Callable[..., Report]] = {
    "prop-2-2": run_prop_2_2,
    "prop-5-4": run_prop_5_4,
    "prop-5-5": run_prop_5_5,
    "prop-5-7": run_prop_5_7,
    "prop-6-2": run_prop_6_2,
    "lemma-A4": run_lemma_A4,
    "lemma-A2": run_lemma_A2,
    "appendix-B": run_appendix_B,
    "hypergraph": run_hypergraph,
    "extraction": run_extraction,
    "fuzz": run_fuzz,
}


def target_defaults(target: str) -> dict:
    import inspect

    sig = inspect.signature(TARGETS[target])
    return {name: p.default for name, p in sig.parameters.items()}


@dataclass
class Campaign:
    name: str
    target: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.target not in TARGETS:
            raise InvalidParams(f"unknown target {self.target!r}")
        defaults = {k: v for k, v in target_defaults(self.target).items() if k != "seed"}
        self.params = _check_params(defaults, self.params, self.target)


def run_campaign(c: Campaign) -> Report:
    try:
        return TARGETS[c.target](**c.params, seed=c.seed)
    except ValueError as exc:
        raise InvalidParams(f"{c.target}: {exc}") from None


def envelope(c: Campaign, report: Report, timestamp: str | None = None) -> dict:
    body = {"campaign": c.name, "target": c.target, "params": jsonable(c.params), "seed": c.seed,
            "report": report.to_dict()}
    return {"body": body, "meta": {"timestamp": timestamp, "version": __version__}}


def csv_summary(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check", "status"])
    for row in report.details.get("checks", []):
        writer.writerow([row["check"], row["status"]])
    return buf.getvalue()
