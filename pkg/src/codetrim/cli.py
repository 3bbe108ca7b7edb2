"""Command-line pipeline over JSONL corpora.

Subcommands chain into the full flow: lex a corpus, categorize statements,
build a score table from attention dumps, report per-category statistics,
prune with any method, and compare pruned outputs. Records stream one at a
time; --jobs fans record work across processes while output order follows
input order. Data goes to --out or stdout, diagnostics to stderr, and every
run ends with a machine-parseable "warnings=<n>" line. Exit code is 0 unless
a hard error (unreadable input, bad table, mismatched ids) occurs.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from codetrim import scores
from codetrim.lexer import UnterminatedLiteral, lex
from codetrim.metrics import MismatchedIds, compare, to_csv, to_markdown
from codetrim.pruning import (
    Method,
    PruneConfig,
    fallback_histogram,
    prune,
    score_tokens,
)
from codetrim.scores import MixedKind, NegativeScore, ScoreKind
from codetrim.statements import classify

_KINDS = {"cls": ScoreKind.CLS, "ende": ScoreKind.ENDE, "self": ScoreKind.SELF_ACCUM}
_METHODS = {
    "leancode": Method.LEANCODE,
    "dietcode": Method.DIETCODE,
    "slimcode": Method.SLIMCODE,
}


class _Diag:
    """Stderr diagnostics; the final line is always "warnings=<n>"."""

    def __init__(self):
        self.warnings = 0

    def warn(self, message: str) -> None:
        self.warnings += 1
        print(f"warning: {message}", file=sys.stderr)

    def bump(self, count: int, message: str) -> None:
        if count:
            self.warnings += count
            print(f"warning: {message}", file=sys.stderr)

    def finish(self) -> None:
        print(f"warnings={self.warnings}", file=sys.stderr)


@contextlib.contextmanager
def _out_stream(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as f:
            yield f


def _iter_corpus(lines, diag: _Diag):
    """Yield (id, code) from corpus JSONL; bad lines warn and are skipped."""
    seen: set[str] = set()
    for lineno, raw in enumerate(lines, 1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError:
            diag.warn(f"line {lineno}: not valid JSON")
            continue
        rid = obj.get("id") if isinstance(obj, dict) else None
        code = obj.get("code") if isinstance(obj, dict) else None
        if not isinstance(rid, str) or not rid or not isinstance(code, str) or not code:
            diag.warn(f"line {lineno}: record needs a string id and non-empty code")
            continue
        if rid in seen:
            diag.warn(f"line {lineno}: duplicate id {rid!r}")
            continue
        seen.add(rid)
        yield rid, code


def _resolve_jobs(jobs: int | None) -> int:
    if jobs is not None and jobs >= 1:
        return jobs
    return os.cpu_count() or 1


def _parallel(fn, items, jobs: int, initializer=None, initargs=()):
    """Order-preserving map; keeps at most jobs * 8 records in flight."""
    if jobs <= 1:
        if initializer is not None:
            initializer(*initargs)
        yield from map(fn, items)
        return
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=initializer, initargs=initargs
    ) as pool:
        pending: deque = deque()
        for item in items:
            pending.append(pool.submit(fn, item))
            if len(pending) >= jobs * 8:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def _run_records(args, diag: _Diag, fn, initializer=None, initargs=()) -> int:
    jobs = _resolve_jobs(args.jobs)
    with open(args.input) as src, _out_stream(args.out) as out:
        records = _iter_corpus(src, diag)
        for status, payload in _parallel(fn, records, jobs, initializer, initargs):
            if status == "ok":
                out.write(payload + "\n")
            else:
                diag.warn(payload)
    return 0


# Worker functions run in the pool; they take (id, code) and hand back
# ("ok", output_line) or ("warn", message) so the parent owns all I/O.


def _lex_record(item) -> tuple[str, str]:
    rid, code = item
    try:
        snippet = lex(code, rid)
    except UnterminatedLiteral as e:
        return ("warn", f"{rid}: {e}")
    tokens = [
        {"index": t.index, "text": t.text, "kind": t.kind.value, "line": t.line, "col": t.col}
        for t in snippet.tokens
    ]
    line = json.dumps(
        {"id": rid, "tokens": tokens}, separators=(",", ":"), ensure_ascii=False
    )
    return ("ok", line)


def _categorize_record(item) -> tuple[str, str]:
    rid, code = item
    try:
        snippet = lex(code, rid)
    except UnterminatedLiteral as e:
        return ("warn", f"{rid}: {e}")
    classified = classify(snippet)
    ranges = [[s.start, s.end, s.category.value] for s in classified.statements]
    line = json.dumps(
        {"id": rid, "ranges": ranges, "line_fallback": classified.line_fallback},
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return ("ok", line)


_PRUNE_CTX = None


def _init_prune(table_json: str, method_value: str, ratio: float) -> None:
    global _PRUNE_CTX
    table = scores.from_json(table_json)
    config = PruneConfig(ratio=ratio, method=Method(method_value), score_kind=table.kind)
    _PRUNE_CTX = (table, config)


def _prune_record(item) -> tuple[str, str]:
    rid, code = item
    table, config = _PRUNE_CTX
    try:
        snippet = lex(code, rid)
    except UnterminatedLiteral as e:
        return ("warn", f"{rid}: {e}")
    if not snippet.tokens:
        return ("warn", f"{rid}: no tokens to prune")
    classified = classify(snippet)
    result, text = prune(snippet, classified, table, config)
    if config.method == Method.SLIMCODE:
        hist: dict[str, int] = {}
    else:
        hist = fallback_histogram(score_tokens(snippet, classified, table))
    row = {
        "id": rid,
        "method": config.method.value,
        "ratio": config.ratio,
        "kept_text": text,
        "removed_indices": list(result.removed_indices),
        "achieved_ratio": result.achieved_ratio,
        "per_category_removed": {
            cat.value: n for cat, n in result.per_category_removed.items()
        },
        "fallback_histogram": hist,
    }
    if result.pre_topup_ratio is not None:
        row["pre_topup_ratio"] = result.pre_topup_ratio
    return ("ok", json.dumps(row, sort_keys=True, separators=(",", ":"), ensure_ascii=False))


def parse_ratio(text: str) -> float:
    """Accept a fraction ("0.3") or a percentage ("30%")."""
    t = text.strip()
    try:
        if t.endswith("%"):
            value = float(Fraction(t[:-1].strip()) / 100)
        else:
            value = float(t)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot parse ratio {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"ratio {value} outside [0, 1]")
    return value


def cmd_lex(args, diag: _Diag) -> int:
    return _run_records(args, diag, _lex_record)


def cmd_categorize(args, diag: _Diag) -> int:
    return _run_records(args, diag, _categorize_record)


def cmd_build_table(args, diag: _Diag) -> int:
    kind = _KINDS[args.kind] if args.kind else None
    with open(args.attention) as f:
        try:
            table, malformed = scores.ingest_dump(f, kind)
        except (MixedKind, NegativeScore) as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
    diag.bump(malformed, f"{malformed} malformed attention records skipped")
    with _out_stream(args.out) as out:
        out.write(scores.to_json(table))
    return 0


def cmd_stats(args, diag: _Diag) -> int:
    table = scores.load(args.table)
    lines = [
        "# Attention score statistics",
        "",
        f"- kind: {table.kind.value}",
        f"- records: {table.record_count}",
        "",
        "| category | max | min | global_avg | global_var | local_avg | local_var |",
        "| --- | --- | --- | --- | --- | --- | --- |",
    ]
    for cat, s in scores.stats(table):
        lines.append(
            f"| {cat.value} | {s.max!r} | {s.min!r} | {s.global_avg!r}"
            f" | {s.global_var!r} | {s.local_avg!r} | {s.local_var!r} |"
        )
    with _out_stream(args.out) as out:
        out.write("\n".join(lines) + "\n")
    return 0


def cmd_prune(args, diag: _Diag) -> int:
    with open(args.table) as f:
        table_json = f.read()
    table = scores.from_json(table_json)
    if table.record_count == 0:
        print("error: score table has no records", file=sys.stderr)
        return 1
    method = _METHODS[args.method]
    return _run_records(
        args,
        diag,
        _prune_record,
        initializer=_init_prune,
        initargs=(table_json, method.value, args.ratio),
    )


def cmd_compare(args, diag: _Diag) -> int:
    rows = []
    for path in args.inputs:
        with open(path) as f:
            for lineno, raw in enumerate(f, 1):
                if not raw.strip():
                    continue
                try:
                    row = json.loads(raw)
                except json.JSONDecodeError:
                    diag.warn(f"{path}:{lineno}: not valid JSON")
                    continue
                if not isinstance(row, dict) or "method" not in row or "id" not in row:
                    diag.warn(f"{path}:{lineno}: not a pruned-output row")
                    continue
                rows.append(row)
    try:
        report = compare(rows)
    except MismatchedIds as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    text = to_markdown(report) if args.format == "md" else to_csv(report)
    with _out_stream(args.out) as out:
        out.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codetrim",
        description="Tokenize, categorize, score, and prune Java corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_corpus_flags(p):
        p.add_argument("--input", required=True, help="corpus JSONL (id, code)")
        p.add_argument("--out", help="output path; stdout when omitted")
        p.add_argument("--jobs", type=int, help="worker processes; default: all cores")

    p = sub.add_parser("lex", help="tokenize each record")
    add_corpus_flags(p)
    p.set_defaults(func=cmd_lex)

    p = sub.add_parser("categorize", help="split and categorize statements")
    add_corpus_flags(p)
    p.set_defaults(func=cmd_categorize)

    p = sub.add_parser("build-table", help="aggregate attention dumps into a score table")
    p.add_argument("--attention", required=True, help="attention dump JSONL")
    p.add_argument("--kind", choices=sorted(_KINDS), help="expected score kind")
    p.add_argument("--out", help="table JSON path; stdout when omitted")
    p.set_defaults(func=cmd_build_table)

    p = sub.add_parser("stats", help="per-category statistics report")
    p.add_argument("--table", required=True, help="score table JSON")
    p.add_argument("--out", help="report path; stdout when omitted")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("prune", help="remove low-importance tokens")
    add_corpus_flags(p)
    p.add_argument("--table", required=True, help="score table JSON")
    p.add_argument("--method", choices=sorted(_METHODS), default="leancode")
    p.add_argument("--ratio", type=parse_ratio, required=True, help="0.3 or 30%%")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("compare", help="summarize pruned outputs against each other")
    p.add_argument("--inputs", nargs="+", required=True, help="pruned JSONL files")
    p.add_argument("--out", help="report path; stdout when omitted")
    p.add_argument("--format", choices=["csv", "md"], default="csv")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    diag = _Diag()
    try:
        code = args.func(args, diag)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        code = 1
    finally:
        diag.finish()
    return code
