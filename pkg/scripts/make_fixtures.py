"""Regenerate the committed synthetic fixtures under tests/data/.

Everything here is deterministic. The attention dumps are synthetic scores
over the hand-labeled corpus; the golden pruned outputs are produced by
deliberately naive reference implementations (two-pass table, iterative
minimum removal, subset enumeration) so the tests compare the real pipeline
against an independent route, not against itself.

Run from the repository root:  python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import csv
import io
import json
import sys
import zlib
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from codetrim.lexer import TokenKind, lex  # noqa: E402
from codetrim.statements import classify, token_categories  # noqa: E402

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
RATIO = 0.3

# Canonical per-category importance ranking (descending local mean) that the
# crafted stats fixture encodes and the report must reproduce.
RANKING = [
    "MethodSignature",
    "Return",
    "Synchronized",
    "Throw",
    "Finally",
    "For",
    "Logging",
    "FunctionInvocation",
    "VariableDeclaration",
    "Break",
    "Getter",
    "IfCondition",
    "Try",
    "Catch",
    "Switch",
    "While",
    "Setter",
    "Arithmetic",
    "Case",
    "Continue",
    "Annotation",
]


def corpus():
    out = []
    with open(DATA / "labeled_corpus.jsonl") as f:
        for line in f:
            if line.strip():
                rec = json.loads(line)
                out.append((rec["id"], rec["code"]))
    return out


def snippet_records(varied: bool):
    """One attention record per token occurrence over the labeled corpus.

    varied=True jitters by category and index (stats texture); varied=False
    gives each token text one constant dyadic score, which keeps every mean
    and statement-weight sum exactly representable for the golden oracles.
    """
    for sid, code in corpus():
        snippet = lex(code, sid)
        cats = token_categories(snippet, classify(snippet))
        for token, cat in zip(snippet.tokens, cats):
            base = (zlib.crc32(f"{token.text}|{cat.value}".encode()) % 4096 + 1) / 64.0
            if varied:
                score = base + (token.index % 7) / 32.0
            else:
                score = (zlib.crc32(token.text.encode()) % 4096 + 1) / 64.0
            yield {
                "snippet_id": sid,
                "token_index": token.index,
                "token_text": token.text,
                "category": cat.value,
                "score": score,
                "kind": "EnDe",
            }


def write_jsonl(path, records):
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec, separators=(",", ":"), ensure_ascii=False) + "\n")
    print(f"wrote {path}")


def ranking_records():
    """21 categories with strictly decreasing local means in RANKING order.

    Two tokens per category, two scores each, symmetric around the target
    mean, so all six report statistics are populated and exact. A few
    reserved-category records are added to confirm they stay out of the
    per-category report.
    """
    for rank, cat in enumerate(RANKING):
        mean = 26.0 - rank
        for t, (name, delta) in enumerate(
            [("alpha", 0.25), ("alpha", -0.25), ("beta", 0.5), ("beta", -0.5)]
        ):
            yield {
                "snippet_id": f"rank{rank:02d}",
                "token_index": t,
                "token_text": f"{name}{rank:02d}",
                "category": cat,
                "score": mean + delta,
                "kind": "EnDe",
            }
    for i, score in enumerate([1.0, 2.0, 3.0]):
        yield {
            "snippet_id": "rankxx",
            "token_index": i,
            "token_text": "filler",
            "category": "Other",
            "score": score,
            "kind": "EnDe",
        }


# ---------------------------------------------------------------------------
# Reference (oracle) pipeline for the goldens. Independent of the library's
# scores/pruning/baselines/metrics modules on purpose.


class OracleTable:
    def __init__(self, records):
        self.pair = {}
        self.token = {}
        self.cat = {}
        total = [0, 0.0]
        for r in records:
            text, cat, score = r["token_text"], r["category"], r["score"]
            e = self.token.setdefault(text, [0, 0.0])
            e[0] += 1
            e[1] += score
            total[0] += 1
            total[1] += score
            if cat != "Other":
                e = self.pair.setdefault((cat, text), [0, 0.0])
                e[0] += 1
                e[1] += score
                e = self.cat.setdefault(cat, [0, 0.0])
                e[0] += 1
                e[1] += score
        self.global_mean = total[1] / total[0]

    def look(self, text, cat):
        if cat != "Other" and (cat, text) in self.pair:
            c, s = self.pair[(cat, text)]
            return s / c, "token_category"
        if text in self.token:
            c, s = self.token[text]
            return s / c, "token_global"
        if cat in self.cat:
            c, s = self.cat[cat]
            return s / c, "category_local"
        return self.global_mean, "table_global"


def naive_lowest_removal(scores, budget):
    """Repeated minimum selection; ties to the higher index."""
    remaining = list(enumerate(scores))
    removed = set()
    for _ in range(budget):
        best = min(remaining, key=lambda p: (p[1], -p[0]))
        removed.add(best[0])
        remaining.remove(best)
    return removed


def ladder_level(token, cat, next_text):
    control = set(
        "if else for while do switch case default break continue return try"
        " catch finally throw synchronized".split()
    )
    literal = {"StringLiteral", "CharLiteral", "NumberLiteral", "BoolNullLiteral"}
    if cat == "MethodSignature":
        return 1
    if token.kind == TokenKind.IDENTIFIER:
        return 2 if next_text == "(" else 3
    if token.kind.value in literal:
        return 4
    if token.kind == TokenKind.KEYWORD:
        return 5 if token.text in control else 6
    if token.kind == TokenKind.ANNOTATION_AT or cat == "Annotation":
        return 7
    return 8


def enumerate_statement_selection(stmts, keep_budget, signature):
    """Exhaustive knapsack: max total weight, lex-smallest kept index set.

    All scores are multiples of 1/64, so weights scaled by 64 are integers
    and every comparison is exact. Include-first depth-first search visits
    sorted index sets in lexicographic order; subtrees whose remaining total
    cannot reach the incumbent are skipped, which never discards an optimal
    set. The first set attaining the known optimum is therefore the
    lexicographically smallest one.
    """
    capacity = keep_budget
    forced = []
    if signature is not None:
        if stmts[signature][2] > keep_budget:
            return None
        capacity -= stmts[signature][2]
        forced.append(signature)
    items = [i for i in range(len(stmts)) if i != signature]
    values = [round(stmts[i][1] * 64) for i in items]
    lengths = [stmts[i][2] for i in items]
    k = len(items)
    suffix = [0] * (k + 1)
    for pos in range(k - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + values[pos]

    best = 0

    def find_best(pos, length, value):
        nonlocal best
        if value > best:
            best = value
        if pos == k or value + suffix[pos] <= best:
            return
        if length + lengths[pos] <= capacity:
            find_best(pos + 1, length + lengths[pos], value + values[pos])
        find_best(pos + 1, length, value)

    find_best(0, 0, 0)
    if best == 0:
        return sorted(forced)

    def first_hit(pos, length, value, chosen):
        if value == best:
            return chosen
        if pos == k or value + suffix[pos] < best:
            return None
        if length + lengths[pos] <= capacity:
            hit = first_hit(
                pos + 1, length + lengths[pos], value + values[pos], chosen + [items[pos]]
            )
            if hit is not None:
                return hit
        return first_hit(pos + 1, length, value, chosen)

    return sorted(forced + first_hit(0, 0, 0, []))


def golden_rows(table, method):
    rows = []
    for sid, code in corpus():
        snippet = lex(code, sid)
        classified = classify(snippet)
        cats = [c.value for c in token_categories(snippet, classified)]
        tokens = snippet.tokens
        n = len(tokens)
        budget = 3 * n // 10  # floor(0.3 n), exact integer arithmetic
        keep_budget = n - budget
        looked = [table.look(t.text, cats[i]) for i, t in enumerate(tokens)]
        scores = [s for s, _ in looked]

        pre_topup = None
        if method == "LeanCode":
            removed = naive_lowest_removal(scores, budget)
        elif method == "SlimCode":
            levels = [
                ladder_level(t, cats[i], tokens[i + 1].text if i + 1 < n else None)
                for i, t in enumerate(tokens)
            ]
            order = sorted(range(n), key=lambda i: (-levels[i], -i))
            removed = set(order[:budget])
        else:
            stmts = []
            signature = None
            for j, st in enumerate(classified.statements):
                weight = sum(scores[st.start : st.end])
                stmts.append(((st.start, st.end), weight, st.end - st.start))
                if st.category.value == "MethodSignature":
                    signature = j
            assert len(stmts) <= 24, f"{sid}: too many statements to enumerate"
            selection = enumerate_statement_selection(stmts, keep_budget, signature)
            if selection is None:
                sig = classified.statements[signature]
                kept_idx = set(range(sig.start, sig.start + keep_budget))
            else:
                kept_idx = set()
                for j in selection:
                    s, e = stmts[j][0]
                    kept_idx.update(range(s, e))
            pre_topup = (n - len(kept_idx)) / n * 100.0
            missing = keep_budget - len(kept_idx)
            if missing > 0:
                dropped = sorted(
                    (i for i in range(n) if i not in kept_idx),
                    key=lambda i: (-scores[i], i),
                )
                kept_idx.update(dropped[:missing])
            removed = set(range(n)) - kept_idx

        kept = [t.text for t in tokens if t.index not in removed]
        per_cat = {}
        for i in sorted(removed):
            per_cat[cats[i]] = per_cat.get(cats[i], 0) + 1
        hist = {}
        if method != "SlimCode":
            for _, level in looked:
                hist[level] = hist.get(level, 0) + 1
        row = {
            "id": sid,
            "method": method,
            "ratio": RATIO,
            "kept_text": " ".join(kept),
            "removed_indices": sorted(removed),
            "achieved_ratio": (n - len(kept)) / n * 100.0,
            "per_category_removed": per_cat,
            "fallback_histogram": hist,
        }
        if pre_topup is not None:
            row["pre_topup_ratio"] = pre_topup
        rows.append(row)
    return rows


def golden_compare_csv(rows_by_method):
    """Set-algebra comparison summary, mirroring the CSV contract."""
    report_order = [
        "Annotation", "Arithmetic", "VariableDeclaration", "FunctionInvocation",
        "Return", "Switch", "Break", "Setter", "Synchronized", "Try", "Catch",
        "MethodSignature", "Finally", "Getter", "Throw", "Case", "While",
        "Continue", "IfCondition", "For", "Logging", "Other",
    ]
    lean = {r["id"]: r for r in rows_by_method["LeanCode"]}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["method", "ratio", "mean_achieved", "jaccard_vs_leancode", "category", "removed_count"]
    )
    for method in sorted(rows_by_method):
        rows = rows_by_method[method]
        by_id = {r["id"]: r for r in rows}
        mean_achieved = sum(r["achieved_ratio"] for r in rows) / len(rows)
        total = 0.0
        for rid in sorted(lean):
            a = set(by_id[rid]["removed_indices"])
            b = set(lean[rid]["removed_indices"])
            assert a and b, f"{rid}: empty removal set at ratio {RATIO}"
            n = round(len(a) * 100.0 / by_id[rid]["achieved_ratio"])
            total += (n - len(a | b)) / (n - len(a & b))
        jaccard = total / len(lean)
        per_cat = {}
        for r in rows:
            for cat, cnt in r["per_category_removed"].items():
                per_cat[cat] = per_cat.get(cat, 0) + cnt
        for cat in report_order:
            if cat in per_cat:
                writer.writerow(
                    [method, RATIO, repr(mean_achieved), repr(jaccard), cat, per_cat[cat]]
                )
    return buf.getvalue()


def main():
    write_jsonl(DATA / "attention_dump_ende.jsonl", snippet_records(varied=True))
    write_jsonl(DATA / "attention_dump_flat.jsonl", snippet_records(varied=False))
    write_jsonl(DATA / "category_ranking_dump.jsonl", ranking_records())
    with open(DATA / "category_ranking_expected.json", "w") as f:
        json.dump({"ranking": RANKING}, f, indent=2)
        f.write("\n")
    print(f"wrote {DATA / 'category_ranking_expected.json'}")

    golden = DATA / "golden"
    golden.mkdir(exist_ok=True)
    table = OracleTable(snippet_records(varied=False))
    rows_by_method = {}
    for method, slug in [
        ("LeanCode", "leancode"),
        ("DietCode", "dietcode"),
        ("SlimCode", "slimcode"),
    ]:
        rows = golden_rows(table, method)
        rows_by_method[method] = rows
        path = golden / f"pruned_{slug}_030.jsonl"
        with open(path, "w") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")
        print(f"wrote {path}")
    with open(golden / "compare_030.csv", "w") as f:
        f.write(golden_compare_csv(rows_by_method))
    print(f"wrote {golden / 'compare_030.csv'}")


if __name__ == "__main__":
    main()
