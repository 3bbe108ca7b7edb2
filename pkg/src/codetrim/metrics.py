"""Simplification metrics and cross-method comparison reports."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from codetrim.statements import REPORT_ORDER, Category


class InvalidCounts(ValueError):
    pass


class MismatchedIds(ValueError):
    pass


def simplified_ratio(code_tokens: int, scode_tokens: int) -> float:
    """Percentage of tokens removed: (code - scode) / code * 100."""
    if code_tokens < 1 or not 0 <= scode_tokens <= code_tokens:
        raise InvalidCounts(f"code={code_tokens}, scode={scode_tokens}")
    return (code_tokens - scode_tokens) / code_tokens * 100.0


@dataclass(frozen=True)
class GroupSummary:
    method: str
    ratio: float
    mean_achieved: float
    jaccard_vs_leancode: float | None
    category_removed: dict[str, int]
    fallback_histogram: dict[str, int]


@dataclass(frozen=True)
class ComparisonReport:
    groups: tuple[GroupSummary, ...]


def _snippet_length(row: dict) -> int | None:
    """Recover n from the removal count and the achieved percentage."""
    removed = len(row["removed_indices"])
    if removed == 0:
        return None
    return round(removed * 100.0 / row["achieved_ratio"])


def _kept_jaccard(a: dict, b: dict) -> float:
    ra = set(a["removed_indices"])
    rb = set(b["removed_indices"])
    if not ra and not rb:
        return 1.0
    n = _snippet_length(a) or _snippet_length(b)
    inter = n - len(ra | rb)
    union = n - len(ra & rb)
    return inter / union if union else 1.0


def compare(rows) -> ComparisonReport:
    """Group pruned-output rows by (method, ratio) and summarize against the
    LeanCode rows at the same ratio. All groups must cover the same ids."""
    groups: dict[tuple[str, float], dict[str, dict]] = {}
    for row in rows:
        key = (row["method"], float(row["ratio"]))
        by_id = groups.setdefault(key, {})
        by_id[row["id"]] = row

    lean_by_ratio = {
        ratio: by_id for (method, ratio), by_id in groups.items() if method == "LeanCode"
    }

    summaries = []
    for (method, ratio), by_id in sorted(groups.items()):
        ids = set(by_id)
        lean = lean_by_ratio.get(ratio)
        if lean is not None and set(lean) != ids:
            raise MismatchedIds(
                f"{method}@{ratio}: ids differ from LeanCode@{ratio}"
            )
        mean_achieved = sum(r["achieved_ratio"] for r in by_id.values()) / len(by_id)
        jaccard = None
        if lean is not None:
            jaccard = sum(
                _kept_jaccard(by_id[i], lean[i]) for i in sorted(ids)
            ) / len(ids)
        category_removed: dict[str, int] = {}
        fallback: dict[str, int] = {}
        for r in by_id.values():
            for cat, cnt in r.get("per_category_removed", {}).items():
                category_removed[cat] = category_removed.get(cat, 0) + cnt
            for level, cnt in r.get("fallback_histogram", {}).items():
                fallback[level] = fallback.get(level, 0) + cnt
        summaries.append(
            GroupSummary(method, ratio, mean_achieved, jaccard, category_removed, fallback)
        )
    return ComparisonReport(tuple(summaries))


_CATEGORY_ORDER = [c.value for c in REPORT_ORDER] + [Category.OTHER.value]


def _ordered_categories(hist: dict[str, int]) -> list[str]:
    return [c for c in _CATEGORY_ORDER if c in hist]


def to_csv(report: ComparisonReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["method", "ratio", "mean_achieved", "jaccard_vs_leancode", "category", "removed_count"]
    )
    for g in report.groups:
        jaccard = "" if g.jaccard_vs_leancode is None else repr(g.jaccard_vs_leancode)
        cats = _ordered_categories(g.category_removed)
        if not cats:
            writer.writerow([g.method, g.ratio, repr(g.mean_achieved), jaccard, "", 0])
        for cat in cats:
            writer.writerow(
                [g.method, g.ratio, repr(g.mean_achieved), jaccard, cat, g.category_removed[cat]]
            )
    return buf.getvalue()


def to_markdown(report: ComparisonReport) -> str:
    lines = [
        "# Method comparison",
        "",
        "| method | ratio | mean achieved % | kept-set Jaccard vs LeanCode |",
        "| --- | --- | --- | --- |",
    ]
    for g in report.groups:
        jaccard = "-" if g.jaccard_vs_leancode is None else f"{g.jaccard_vs_leancode:.6f}"
        lines.append(f"| {g.method} | {g.ratio} | {g.mean_achieved:.6f} | {jaccard} |")
    lines.append("")
    lines.append("## Removed tokens by category")
    lines.append("")
    lines.append("| method | ratio | category | removed |")
    lines.append("| --- | --- | --- | --- |")
    for g in report.groups:
        for cat in _ordered_categories(g.category_removed):
            lines.append(f"| {g.method} | {g.ratio} | {cat} | {g.category_removed[cat]} |")
    lines.append("")
    lines.append("## Score fallback levels")
    lines.append("")
    lines.append("| method | ratio | level | tokens |")
    lines.append("| --- | --- | --- | --- |")
    for g in report.groups:
        for level in sorted(g.fallback_histogram):
            lines.append(f"| {g.method} | {g.ratio} | {level} | {g.fallback_histogram[level]} |")
    lines.append("")
    return "\n".join(lines)
