"""Token-importance score tables.

Aggregates attention-score records into per-(token, category) and per-token
streaming statistics, from which category-local averages, token-global
averages, and the per-category report columns are derived. Tables from
independent shards merge fieldwise into exactly what a single-pass ingest of
the concatenated stream would produce.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum

from codetrim.statements import REPORT_ORDER, Category


class ScoreKind(str, Enum):
    CLS = "CLS"
    ENDE = "EnDe"
    SELF_ACCUM = "SelfAccum"


class FallbackLevel(str, Enum):
    TOKEN_CATEGORY = "token_category"
    TOKEN_GLOBAL = "token_global"
    CATEGORY_LOCAL = "category_local"
    TABLE_GLOBAL = "table_global"


class MixedKind(ValueError):
    pass


class NegativeScore(ValueError):
    pass


class MalformedRecord(ValueError):
    pass


class EmptyTable(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class AttentionRecord:
    snippet_id: str
    token_index: int
    token_text: str
    category: Category
    score: float
    kind: ScoreKind


@dataclass
class ScoreEntry:
    count: int = 0
    sum: float = 0.0
    sum_sq: float = 0.0

    def add(self, score: float) -> None:
        self.count += 1
        self.sum += score
        self.sum_sq += score * score

    @property
    def mean(self) -> float:
        return self.sum / self.count

    @property
    def variance(self) -> float:
        # population variance; clamp the tiny negatives float math can leave
        v = self.sum_sq / self.count - self.mean**2
        return 0.0 if v < 0 else v


@dataclass(frozen=True, slots=True)
class CategoryStats:
    max: float
    min: float
    global_avg: float
    global_var: float
    local_avg: float
    local_var: float


_DIGEST_BITS = 256


def record_digest(record: AttentionRecord) -> int:
    payload = json.dumps(
        {
            "snippet_id": record.snippet_id,
            "token_index": record.token_index,
            "token_text": record.token_text,
            "category": record.category.value,
            "score": record.score,
            "kind": record.kind.value,
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return int.from_bytes(hashlib.sha256(payload.encode()).digest(), "big")


def parse_record(obj: object) -> AttentionRecord:
    """Dict → AttentionRecord; anything off-shape raises MalformedRecord."""
    if not isinstance(obj, dict):
        raise MalformedRecord(f"not an object: {obj!r}")
    try:
        snippet_id = obj["snippet_id"]
        token_index = obj["token_index"]
        token_text = obj["token_text"]
        category = Category(obj["category"])
        score = obj["score"]
        kind = ScoreKind(obj["kind"])
    except (KeyError, ValueError, TypeError) as e:
        raise MalformedRecord(str(e)) from e
    if (
        not isinstance(snippet_id, str)
        or not isinstance(token_index, int)
        or isinstance(token_index, bool)
        or token_index < 0
        or not isinstance(token_text, str)
        or not token_text
        or not isinstance(score, (int, float))
        or isinstance(score, bool)
        or not math.isfinite(score)
    ):
        raise MalformedRecord(f"bad field values: {obj!r}")
    return AttentionRecord(snippet_id, token_index, token_text, category, float(score), kind)


@dataclass
class ScoreTable:
    """Built score table; treat as immutable once finalized."""

    kind: ScoreKind
    by_token: dict[str, ScoreEntry] = field(default_factory=dict)
    # category -> token -> entry; the Other category never appears here
    by_token_category: dict[Category, dict[str, ScoreEntry]] = field(default_factory=dict)
    by_category: dict[Category, CategoryStats] = field(default_factory=dict)
    record_count: int = 0
    build_timestamp: int = 0
    source_digest: int = 0
    _extremes: dict[Category, tuple[float, float]] = field(default_factory=dict)
    _global_mean: float = 0.0

    @property
    def global_mean(self) -> float:
        return self._global_mean

    def finalize(self) -> None:
        """Recompute derived stats from the streaming accumulators."""
        total = 0
        total_sum = 0.0
        for token in sorted(self.by_token):
            e = self.by_token[token]
            total += e.count
            total_sum += e.sum
        self._global_mean = total_sum / total if total else 0.0

        self.by_category = {}
        for cat in sorted(self.by_token_category, key=lambda c: c.value):
            tokens = self.by_token_category[cat]
            n = 0
            local_sum = 0.0
            local_sq = 0.0
            global_sum = 0.0
            global_sq = 0.0
            for token in sorted(tokens):
                e = tokens[token]
                n += e.count
                local_sum += e.sum
                local_sq += e.sum_sq
                mu = self.by_token[token].mean
                global_sum += e.count * mu
                global_sq += e.count * mu * mu
            local_avg = local_sum / n
            global_avg = global_sum / n
            local_var = max(0.0, local_sq / n - local_avg * local_avg)
            global_var = max(0.0, global_sq / n - global_avg * global_avg)
            hi, lo = self._extremes[cat]
            self.by_category[cat] = CategoryStats(
                max=hi,
                min=lo,
                global_avg=global_avg,
                global_var=global_var,
                local_avg=local_avg,
                local_var=local_var,
            )


def ingest(records, kind: ScoreKind | None = None) -> ScoreTable:
    """Single streaming pass over AttentionRecords.

    kind pins the expected score kind; when omitted it is taken from the
    first record. Mixed kinds raise MixedKind, negative scores NegativeScore.
    """
    table = ScoreTable(kind=kind if kind is not None else ScoreKind.CLS)
    seen_kind = kind
    for r in records:
        if seen_kind is None:
            seen_kind = r.kind
            table.kind = r.kind
        if r.kind != seen_kind:
            raise MixedKind(f"{r.kind.value} record in {seen_kind.value} table")
        if r.score < 0:
            raise NegativeScore(f"score {r.score} for {r.token_text!r}")
        entry = table.by_token.get(r.token_text)
        if entry is None:
            entry = table.by_token[r.token_text] = ScoreEntry()
        entry.add(r.score)
        if r.category != Category.OTHER:
            cat_tokens = table.by_token_category.get(r.category)
            if cat_tokens is None:
                cat_tokens = table.by_token_category[r.category] = {}
            centry = cat_tokens.get(r.token_text)
            if centry is None:
                centry = cat_tokens[r.token_text] = ScoreEntry()
            centry.add(r.score)
            hi_lo = table._extremes.get(r.category)
            if hi_lo is None:
                table._extremes[r.category] = (r.score, r.score)
            else:
                hi, lo = hi_lo
                if r.score > hi or r.score < lo:
                    table._extremes[r.category] = (max(hi, r.score), min(lo, r.score))
        table.record_count += 1
        table.source_digest ^= record_digest(r)
    table.build_timestamp = int(time.time())
    table.finalize()
    return table


def ingest_dump(lines, kind: ScoreKind | None = None) -> tuple[ScoreTable, int]:
    """Ingest JSONL lines; malformed lines are skipped and counted."""
    malformed = 0

    def gen():
        nonlocal malformed
        for line in lines:
            if not line.strip():
                continue
            try:
                yield parse_record(json.loads(line))
            except (json.JSONDecodeError, MalformedRecord):
                malformed += 1

    table = ingest(gen(), kind)
    return table, malformed


def lookup(table: ScoreTable, token_text: str, category: Category) -> tuple[float, FallbackLevel]:
    """Score for a token occurrence, with the fallback level that produced it.

    Chain: category-local average for the token, then the token's global
    average, then the category's local average, then the table-wide mean.
    """
    if table.record_count == 0:
        raise EmptyTable("lookup on a table with no records")
    if category != Category.OTHER:
        cat_tokens = table.by_token_category.get(category)
        if cat_tokens is not None:
            entry = cat_tokens.get(token_text)
            if entry is not None:
                return entry.mean, FallbackLevel.TOKEN_CATEGORY
    entry = table.by_token.get(token_text)
    if entry is not None:
        return entry.mean, FallbackLevel.TOKEN_GLOBAL
    stats_entry = table.by_category.get(category)
    if stats_entry is not None:
        return stats_entry.local_avg, FallbackLevel.CATEGORY_LOCAL
    return table.global_mean, FallbackLevel.TABLE_GLOBAL


def stats(table: ScoreTable) -> list[tuple[Category, CategoryStats]]:
    """Per-category report rows in canonical order; empty categories omitted."""
    return [
        (cat, table.by_category[cat]) for cat in REPORT_ORDER if cat in table.by_category
    ]


def merge(a: ScoreTable, b: ScoreTable) -> ScoreTable:
    """Fieldwise combination; equals ingest over the concatenated streams."""
    if a.record_count and b.record_count and a.kind != b.kind:
        raise MixedKind(f"cannot merge {a.kind.value} with {b.kind.value}")
    kind = b.kind if (not a.record_count and b.record_count) else a.kind
    out = ScoreTable(kind=kind)
    for src in (a, b):
        for token, e in src.by_token.items():
            dst = out.by_token.get(token)
            if dst is None:
                dst = out.by_token[token] = ScoreEntry()
            dst.count += e.count
            dst.sum += e.sum
            dst.sum_sq += e.sum_sq
        for cat, tokens in src.by_token_category.items():
            dcat = out.by_token_category.setdefault(cat, {})
            for token, e in tokens.items():
                dst = dcat.get(token)
                if dst is None:
                    dst = dcat[token] = ScoreEntry()
                dst.count += e.count
                dst.sum += e.sum
                dst.sum_sq += e.sum_sq
        for cat, (hi, lo) in src._extremes.items():
            cur = out._extremes.get(cat)
            if cur is None:
                out._extremes[cat] = (hi, lo)
            else:
                out._extremes[cat] = (max(cur[0], hi), min(cur[1], lo))
    out.record_count = a.record_count + b.record_count
    out.source_digest = a.source_digest ^ b.source_digest
    out.build_timestamp = max(a.build_timestamp, b.build_timestamp)
    out.finalize()
    return out


def _entry_to_list(e: ScoreEntry) -> list:
    return [e.count, e.sum, e.sum_sq]


def to_canonical_dict(table: ScoreTable) -> dict:
    return {
        "kind": table.kind.value,
        "version": 1,
        "meta": {
            "record_count": table.record_count,
            "build_timestamp": table.build_timestamp,
            "source_digest": f"{table.source_digest:064x}",
        },
        "by_token": {t: _entry_to_list(e) for t, e in sorted(table.by_token.items())},
        "by_token_category": {
            cat.value: {t: _entry_to_list(e) for t, e in sorted(tokens.items())}
            for cat, tokens in sorted(table.by_token_category.items(), key=lambda kv: kv[0].value)
        },
        "by_category": {
            cat.value: {
                "max": s.max,
                "min": s.min,
                "global_avg": s.global_avg,
                "global_var": s.global_var,
                "local_avg": s.local_avg,
                "local_var": s.local_var,
            }
            for cat, s in sorted(table.by_category.items(), key=lambda kv: kv[0].value)
        },
    }


def to_json(table: ScoreTable) -> str:
    return json.dumps(to_canonical_dict(table), sort_keys=True, separators=(",", ":")) + "\n"


def from_json(text: str) -> ScoreTable:
    obj = json.loads(text)
    table = ScoreTable(kind=ScoreKind(obj["kind"]))
    table.record_count = obj["meta"]["record_count"]
    table.build_timestamp = obj["meta"]["build_timestamp"]
    table.source_digest = int(obj["meta"]["source_digest"], 16)
    for token, (c, s, ss) in obj["by_token"].items():
        table.by_token[token] = ScoreEntry(c, s, ss)
    for cat_name, tokens in obj["by_token_category"].items():
        cat = Category(cat_name)
        table.by_token_category[cat] = {
            t: ScoreEntry(c, s, ss) for t, (c, s, ss) in tokens.items()
        }
    for cat_name, s in obj["by_category"].items():
        table._extremes[Category(cat_name)] = (s["max"], s["min"])
    table.finalize()
    return table


def save(table: ScoreTable, path) -> None:
    with open(path, "w") as f:
        f.write(to_json(table))


def load(path) -> ScoreTable:
    with open(path) as f:
        return from_json(f.read())
