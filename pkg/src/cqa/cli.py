"""Command-line front end: ``cqa classify``, ``cqa certain`` and ``cqa gen``."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from . import generators, matching, oracle, path, sjf
from .core import (DEFAULT_REPAIR_LIMIT, ConjunctiveQuery, Database, count_repairs,
                   parse_database, parse_query, render_database, render_fact)
from .errors import CQAError, LimitExceeded, QueryShapeError, SchemaError
from .fixpoint import run_cqk, run_cqk_plus, trace_jsonl
from .queries import CATALOG

EXIT_OK, EXIT_ERROR, EXIT_UNDECIDED = 0, 1, 2


class Inapplicable(Exception):
    """The requested method or analysis does not apply to this input."""


def load_query(source: str) -> ConjunctiveQuery:
    """A catalog name (q1..q5, q2p, q3p), a file holding a query, or query text."""
    if source in CATALOG:
        return CATALOG[source]
    p = Path(source)
    if p.is_file():
        return parse_query(p.read_text())
    return parse_query(source)


def load_database(file: str) -> Database:
    text = sys.stdin.read() if file == "-" else Path(file).read_text()
    return parse_database(text)


def _write(text: str, dest: str | None) -> None:
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


# ---------------------------------------------------------------------------
# classify

def classify_report(q: ConjunctiveQuery) -> tuple[dict, str | None]:
    """Verdict dict and optional DOT text; raises Inapplicable if unclassified."""
    if q.is_self_join_free():
        c = sjf.classify(q)
        report = {"query": str(q), "fragment": "self-join-free", **c.to_dict()}
        return report, c.graph.to_dot()
    if q.is_path():
        aut = path.build_automaton(q)
        bad = path.counterexample_word(q, "factor")
        if bad is not None:
            verdict, witness = "CONP_COMPLETE", {"word_without_factor": " ".join(bad)}
        else:
            not_prefix = path.counterexample_word(q, "prefix")
            if not_prefix is None:
                verdict, witness = "FO", {"prefix_condition": True}
            else:
                verdict = "PTIME_NOT_FO"
                witness = {"factor_condition": True, "word_without_prefix": " ".join(not_prefix)}
        report = {"query": str(q), "fragment": "path", "word": " ".join(aut.word),
                  "verdict": verdict, "witness": witness}
        return report, aut.to_dot()
    note = "neither self-join-free nor a path query; no dichotomy applies"
    if _is_q4_shape(q):
        note = "this query is equivalent to saturating bipartite matching (SBM); its exact complexity is open"
    raise Inapplicable(note)


def _is_q4_shape(q: ConjunctiveQuery) -> bool:
    return same_up_to_renaming(q, CATALOG["q4"])


def same_up_to_renaming(q: ConjunctiveQuery, other: ConjunctiveQuery) -> bool:
    """Equal up to a renaming of variables and atom order."""
    def shape(cq: ConjunctiveQuery):
        names: dict[str, int] = {}
        out = []
        for a in cq.atoms:
            out.append((a.relation, tuple(names.setdefault(v, len(names)) for v in a.variables)))
        return out

    if len(q) != len(other):
        return False
    target = shape(other)
    return any(shape(ConjunctiveQuery(tuple(p))) == target for p in itertools.permutations(q.atoms))


def cmd_classify(args) -> int:
    q = load_query(args.query)
    try:
        report, dot = classify_report(q)
    except Inapplicable as exc:
        report = {"query": str(q), "verdict": "unclassified", "note": str(exc)}
        _emit(report, args.json)
        return EXIT_UNDECIDED
    if args.dot:
        _write(dot, args.dot)
    _emit(report, args.json)
    return EXIT_OK


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
        return
    for key, value in report.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value)
        print(f"{key}: {value}")


# ---------------------------------------------------------------------------
# certain

METHODS = ("oracle", "cqk", "cqk_plus", "nfix", "matching")


def decide(q: ConjunctiveQuery, db: Database, method: str, k: int | None = None,
           limit: int = DEFAULT_REPAIR_LIMIT) -> tuple[bool, dict, str | None]:
    """Answer, statistics and an optional trace text for one method."""
    if method == "oracle":
        witness = oracle.counterexample_repair(db, q, limit)
        stats = {"repairs": count_repairs(db)}
        if witness is not None:
            stats["counterexample"] = [render_fact(f, db.schema) for f in witness]
        return witness is None, stats, None
    if method in ("cqk", "cqk_plus"):
        run = run_cqk if method == "cqk" else run_cqk_plus
        try:
            res = run(db, q, k)
        except QueryShapeError as exc:
            raise Inapplicable(str(exc)) from exc
        stats = {"k": res.table.k, "rounds": res.table.rounds,
                 "empty_set_round": res.empty_set_round,
                 "basis_size": len(res.table.basis())}
        return res.accepted, stats, trace_jsonl(res.table)
    if method == "nfix":
        if not q.is_path():
            raise Inapplicable("nfix needs a path query")
        accepted, table = path.run_n_fixpoint(db, q)
        stats = {"rounds": table.rounds, "pairs": len(table.entries()),
                 "factor_condition": path.factor_condition(q)}
        return accepted, stats, "\n".join(table.render()) + "\n"
    if method == "matching":
        if not same_up_to_renaming(q, CATALOG["q4"]):
            raise Inapplicable("matching applies to R(x; y, z) & R(z; x, y) only")
        try:
            answer = matching.certain_q4(db)
        except SchemaError as exc:
            raise Inapplicable(str(exc)) from exc
        return answer, {"blocks": len(db.blocks)}, None
    raise Inapplicable(f"unknown method {method!r}")


def cmd_certain(args) -> int:
    q = load_query(args.query)
    db = load_database(args.db)
    try:
        answer, stats, trace = decide(q, db, args.method, args.k, args.limit_repairs)
    except Inapplicable as exc:
        _emit({"method": args.method, "answer": "inapplicable", "note": str(exc)}, args.json)
        return EXIT_UNDECIDED
    if args.trace and trace is not None:
        _write(trace, args.trace)
    _emit({"method": args.method, "answer": "yes" if answer else "no", **stats}, args.json)
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen

def cmd_gen(args) -> int:
    if args.family == "dn":
        db = generators.gen_dn(args.n)
    elif args.family == "dg":
        inst = matching.parse_bipartite(Path(args.graph).read_text())
        db = matching.sbm_to_q4(inst)
    elif args.family == "q5":
        db = generators.q4_to_q5(load_database(args.db))
    else:
        q = load_query(args.query)
        profile = generators.profile_for(
            q, n_blocks=args.blocks, max_block_size=args.block_size,
            domain_size=args.domain, seed=args.seed,
            plant=q if args.plant else None, n_plant=args.plant)
        db = generators.gen_random(profile)
    _write(render_database(db), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="complexity verdict for a query")
    p.add_argument("--query", required=True, help="catalog name, query file or query text")
    p.add_argument("--dot", help="write the attack graph or automaton as DOT to this file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("certain", help="decide certainty of a query on a database")
    p.add_argument("--query", required=True)
    p.add_argument("--db", required=True, help="database file, or - for stdin")
    p.add_argument("--method", choices=METHODS, default="oracle")
    p.add_argument("--k", type=int, help="k-set size (default: number of atoms)")
    p.add_argument("--trace", help="write the fixpoint trace to this file (- for stdout)")
    p.add_argument("--limit-repairs", type=int, default=DEFAULT_REPAIR_LIMIT,
                   help="search budget for the oracle")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_certain)

    p = sub.add_parser("gen", help="generate a database")
    p.add_argument("family", choices=("dn", "dg", "q5", "random"))
    p.add_argument("--n", type=int, default=4, help="size parameter for dn")
    p.add_argument("--graph", help="bipartite graph file for dg")
    p.add_argument("--db", help="q4 database for q5")
    p.add_argument("--query", default="q1", help="query whose schema random uses")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks", type=int, default=6)
    p.add_argument("--block-size", type=int, default=2)
    p.add_argument("--domain", type=int, default=4)
    p.add_argument("--plant", type=int, default=0, help="number of planted solutions")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen":
        needed = {"dg": "graph", "q5": "db"}.get(args.family)
        if needed and getattr(args, needed) is None:
            parser.error(f"gen {args.family} needs --{needed}")
        if args.family == "dn" and args.n < 4:
            parser.error("gen dn needs --n >= 4")
    try:
        return args.func(args)
    except (OSError, CQAError, ValueError) as exc:
        kind = "limit" if isinstance(exc, LimitExceeded) else "error"
        print(f"cqa: {kind}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
