"""Command-line front end.

Exit codes are a stable scripting contract: 0 success, 1 semantic refusal
(query outside the class, repair space over the cap, mode mismatch),
2 input error (syntax, schema, I/O, bad flags).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .attacks import attack_graph, attack_graph_dot
from .classify import fuxman_graph, fuxman_graph_dot, in_cparsimony
from .errors import AnalysisRefusal, InputError
from .evaluate import (
    cqacount_oracle,
    cqacount_parsimonious,
    range_answers_json,
    range_answers_tsv,
)
from .fds import fdset
from .instances import (
    DEFAULT_REPAIR_CAP,
    build_3dm_instance,
    enumerate_repairs,
    load_bundle,
    repair_count,
    save_bundle,
    threedm_query,
)
from .queries import (
    ConjunctiveQuery,
    QueryError,
    make_free,
    parse_query,
    query_graph,
    query_graph_dot,
    serialize_query,
)


def _load_query(path: str) -> ConjunctiveQuery:
    return parse_query(Path(path).read_text(encoding="utf-8"))


def _effective_cap(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("CQA_CAP")
    if env is None:
        return DEFAULT_REPAIR_CAP
    try:
        return int(env)
    except ValueError:
        raise InputError(f"CQA_CAP={env!r} is not an integer") from None


def cmd_classify(args: argparse.Namespace) -> int:
    report = in_cparsimony(_load_query(args.query))
    if args.json:
        print(json.dumps(report.to_json_dict(), indent=2))
        return 0
    yesno = lambda b: "yes" if b else "no"  # noqa: E731
    print(f"acyclic: {yesno(report.acyclic)}")
    strong = ", ".join(f"{s} -> {t}" for s, t in report.strong_attacks)
    print(f"strong attacks: {strong or 'none'}")
    print(f"id-set: {' '.join(report.id_set) if report.id_set is not None else 'none'}")
    print(f"cparsimony: {yesno(report.in_cparsimony)}")
    print(f"cforest: {yesno(report.in_cforest)}")
    print(f"violation: {report.violation.describe() if report.violation else 'none'}")
    return 0


def cmd_count(args: argparse.Namespace) -> int:
    q = _load_query(args.query)
    db = load_bundle(args.db)
    cap = _effective_cap(args.cap)
    results = {}
    if args.mode in ("parsimonious", "both"):
        results["parsimonious"] = cqacount_parsimonious(q, db)
    if args.mode in ("oracle", "both"):
        full = make_free(q, q.bound_vars)
        results["oracle"] = cqacount_oracle(full, q.free_vars, db, cap)
    if args.json:
        payload = {mode: range_answers_json(ans) for mode, ans in results.items()}
        if args.mode == "both":
            payload["agree"] = results["parsimonious"] == results["oracle"]
            print(json.dumps(payload, indent=2))
        else:
            print(json.dumps(payload[args.mode], indent=2))
    else:
        for mode, answers in results.items():
            if args.mode == "both":
                print(f"# {mode}")
            body = range_answers_tsv(answers)
            if body:
                print(body)
    if args.mode == "both" and results["parsimonious"] != results["oracle"]:
        print("error: parsimonious and oracle results disagree", file=sys.stderr)
        return 1
    return 0


def cmd_graph(args: argparse.Namespace) -> int:
    q = _load_query(args.query)
    if args.kind == "attack":
        print(attack_graph_dot(attack_graph(q)), end="")
    elif args.kind == "fuxman":
        print(fuxman_graph_dot(fuxman_graph(q)), end="")
    else:
        print(query_graph_dot(query_graph(q)), end="")
    return 0


def cmd_fd(args: argparse.Namespace) -> int:
    q = _load_query(args.query)
    lhs = tuple(v for v in (s.strip() for s in args.lhs.split(",")) if v)
    unknown = [v for v in lhs if v not in q.variables]
    if unknown:
        raise InputError(f"variable(s) {unknown} do not occur in the query")
    print(" ".join(sorted(fdset(q).closure(lhs))))
    return 0


def cmd_repairs(args: argparse.Namespace) -> int:
    db = load_bundle(args.db)
    count = repair_count(db)
    cap = _effective_cap(None)
    shown = count if args.limit is None else min(args.limit, count)
    print(f"{count} repairs")
    for i, repair in enumerate(enumerate_repairs(db, cap), 1):
        if i > shown:
            break
        print(f"repair {i}:")
        for fact in repair.facts:
            print(f"  {fact}")
    return 0


def cmd_gen3dm(args: argparse.Namespace) -> int:
    triples = []
    for lineno, raw in enumerate(Path(args.triples).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InputError(f"{args.triples}:{lineno}: expected three tokens, got {len(parts)}")
        triples.append(tuple(parts))
    db = build_3dm_instance(triples)
    save_bundle(db, args.out)
    (Path(args.out) / "query.cq").write_text(
        serialize_query(threedm_query()) + "\n", encoding="utf-8"
    )
    print(f"wrote {args.out}: {len(db.schema)} relations, {len(db.facts)} facts")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqa",
        description="Classify self-join-free conjunctive queries and compute "
        "range-consistent COUNT answers over inconsistent databases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="Cparsimony/Cforest membership report")
    p.add_argument("query", help="query file (.cq)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("count", help="range-consistent COUNT per head group")
    p.add_argument("--db", required=True, help="bundle directory (schema.txt + CSVs)")
    p.add_argument("--query", required=True)
    p.add_argument("--mode", choices=("parsimonious", "oracle", "both"), default="both")
    p.add_argument("--cap", type=int, default=None, help="repair-space cap for the oracle")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("graph", help="emit a graph of the query as DOT")
    p.add_argument("query")
    p.add_argument("--kind", choices=("attack", "fuxman", "query"), default="attack")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("fd", help="closure of a variable set under the query's FDs")
    p.add_argument("query")
    p.add_argument("--lhs", default="", help="comma-separated variables (empty for {})")
    p.set_defaults(func=cmd_fd)

    p = sub.add_parser("repairs", help="count and dump the repairs of a bundle")
    p.add_argument("--db", required=True)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_repairs)

    p = sub.add_parser("gen3dm", help="build a matching-gadget bundle from a triples file")
    p.add_argument("triples", help="one 'a1 a2 a3' triple per line")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen3dm)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AnalysisRefusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
