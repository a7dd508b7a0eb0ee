"""Command line entry point: ``ksplit verify | generate | extract``.

Exit codes: 0 all checks pass, 1 a check failed, 2 a search budget was
exceeded, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

from . import campaigns
from .detectors import IndexedSequence, end_homogenize, is_end_homogeneous
from .report import BudgetExceeded, KsplitError, InvalidParams
from .structures import Structure

EXIT_PASS, EXIT_FAIL, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_params(p: argparse.ArgumentParser, defaults: dict) -> None:
    for key, d in defaults.items():
        kind = float if isinstance(d, float) else int if isinstance(d, int) else str
        p.add_argument(f"--{key}", type=kind, default=None, dest=f"param_{key}",
                       help=f"default {d!r}")


def _collect(ns: argparse.Namespace) -> dict:
    return {k[len("param_"):]: v for k, v in vars(ns).items() if k.startswith("param_") and v is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ksplit", description="Finite checks of k-splitting and indiscernible extraction.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    verify = sub.add_parser("verify", help="run a verification campaign")
    targets = verify.add_subparsers(dest="target", required=True, parser_class=_Parser)
    for name in campaigns.TARGETS:
        t = targets.add_parser(name)
        defaults = campaigns.target_defaults(name)
        t.add_argument("--seed", type=int, default=defaults.pop("seed"))
        _add_params(t, defaults)
        t.add_argument("--name", default=None, help="campaign name (defaults to the target)")
        t.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
        t.add_argument("--csv", default=None, help="also write a check/status table")

    gen = sub.add_parser("generate", help="write a structure file")
    kinds = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for name, (defaults, _) in campaigns.GENERATORS.items():
        g = kinds.add_parser(name)
        _add_params(g, defaults)
        g.add_argument("--out", default=None)

    ext = sub.add_parser("extract", help="extract an end-homogeneous subsequence from a structure file")
    ext.add_argument("structure")
    ext.add_argument("k", type=int, nargs="?", default=1)
    ext.add_argument("--out", default=None)
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_verify(ns) -> int:
    c = campaigns.Campaign(ns.name or ns.target, ns.target, _collect(ns), ns.seed)
    report = campaigns.run_campaign(c)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    _emit(json.dumps(campaigns.envelope(c, report, stamp), indent=2, sort_keys=True), ns.out)
    if ns.csv:
        with open(ns.csv, "w") as fh:
            fh.write(campaigns.csv_summary(report))
    return EXIT_PASS if report else EXIT_FAIL


def cmd_generate(ns) -> int:
    S = campaigns.generate(ns.kind, _collect(ns))
    _emit(S.to_json(), ns.out)
    return EXIT_PASS


def cmd_extract(ns) -> int:
    try:
        with open(ns.structure) as fh:
            S = Structure.from_json(fh.read())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InvalidParams(f"cannot load {ns.structure}: {exc}") from None
    if ns.k < 1:
        raise InvalidParams("k must be at least 1")
    elems = list(S.elements())
    seq = IndexedSequence(S, [(x,) for x in elems])
    X = end_homogenize(seq, ns.k)
    report = is_end_homogeneous(seq.sub(X), ns.k)
    out = {"k": ns.k, "indices": X, "elements": [elems[i] for i in X], "report": report.to_dict()}
    _emit(json.dumps(out, indent=2, sort_keys=True, default=str), ns.out)
    return EXIT_PASS if report else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "generate": cmd_generate, "extract": cmd_extract}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        return COMMANDS[ns.command](ns)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidParams, KsplitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
