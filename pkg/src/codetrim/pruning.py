"""Token removal under a target simplification ratio.

The core method drops the floor(ratio * n) lowest-scoring tokens, breaking
ties by removing the higher index first. That equals the iterative
remove-the-minimum loop but runs as one sort; the naive loop survives as a
test oracle. Baseline methods plug in through prune().
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

from codetrim.lexer import CodeToken, Snippet
from codetrim.metrics import simplified_ratio
from codetrim.scores import FallbackLevel, ScoreKind, ScoreTable, lookup
from codetrim.statements import Category, ClassifiedSnippet, token_categories


class Method(str, Enum):
    LEANCODE = "LeanCode"
    DIETCODE = "DietCode"
    SLIMCODE = "SlimCode"


class UnknownMethod(ValueError):
    pass


@dataclass(frozen=True)
class PruneConfig:
    ratio: float
    method: Method = Method.LEANCODE
    tie_rule: str = "higher index removed first"
    score_kind: ScoreKind = ScoreKind.ENDE
    protected_indices: frozenset[int] = frozenset()

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"ratio {self.ratio} outside [0, 1]")


@dataclass(frozen=True, slots=True)
class ScoredToken:
    token: CodeToken
    category: Category
    score: float
    fallback_level: FallbackLevel


@dataclass(frozen=True)
class PruneResult:
    kept: tuple[CodeToken, ...]
    removed_indices: tuple[int, ...]
    achieved_ratio: float
    per_category_removed: dict[Category, int]
    pre_topup_ratio: float | None = None


@lru_cache(maxsize=None)
def _ratio_fraction(ratio: float) -> Fraction:
    # Ratios are typed as decimals ("0.3", "30%"); the shortest repr of the
    # float recovers that decimal, so floor(ratio * n) never loses a token
    # to binary rounding (e.g. 0.7 * 90 in doubles lands just under 63).
    return Fraction(str(ratio))


def removal_budget(ratio: float, n: int) -> int:
    frac = _ratio_fraction(ratio)
    return frac.numerator * n // frac.denominator


def score_tokens(
    snippet: Snippet, classified: ClassifiedSnippet, table: ScoreTable
) -> list[ScoredToken]:
    """Score every token through its statement category's lookup chain."""
    cats = token_categories(snippet, classified)
    out = []
    for token, cat in zip(snippet.tokens, cats):
        score, level = lookup(table, token.text, cat)
        out.append(ScoredToken(token, cat, score, level))
    return out


def build_result(
    tokens,
    categories,
    removed: set[int],
    pre_topup_ratio: float | None = None,
) -> PruneResult:
    n = len(tokens)
    kept = tuple(t for t in tokens if t.index not in removed)
    per_category: dict[Category, int] = {}
    for t, cat in zip(tokens, categories):
        if t.index in removed:
            per_category[cat] = per_category.get(cat, 0) + 1
    return PruneResult(
        kept=kept,
        removed_indices=tuple(sorted(removed)),
        achieved_ratio=simplified_ratio(n, len(kept)),
        per_category_removed=per_category,
        pre_topup_ratio=pre_topup_ratio,
    )


def prune_leancode(
    scored: list[ScoredToken], ratio: float, protected: frozenset[int] = frozenset()
) -> PruneResult:
    """Remove exactly floor(ratio * n) lowest-scoring tokens.

    Ties fall to the higher index. Protection is off by default; a protected
    token is skipped even when its score is lowest, which can undershoot the
    budget when nearly everything is protected.
    """
    n = len(scored)
    budget = removal_budget(ratio, n)
    if protected:
        candidates = [s for s in scored if s.token.index not in protected]
    else:
        candidates = scored
    order = sorted(candidates, key=lambda s: (s.score, -s.token.index))
    removed = {s.token.index for s in order[:budget]}
    return build_result([s.token for s in scored], [s.category for s in scored], removed)


def fallback_histogram(scored: list[ScoredToken]) -> dict[str, int]:
    hist: dict[str, int] = {}
    for s in scored:
        hist[s.fallback_level.value] = hist.get(s.fallback_level.value, 0) + 1
    return hist


def prune(
    snippet: Snippet,
    classified: ClassifiedSnippet,
    table: ScoreTable | None,
    config: PruneConfig,
) -> tuple[PruneResult, str]:
    """Dispatch on config.method; returns the result and the simplified text."""
    if config.method == Method.LEANCODE:
        scored = score_tokens(snippet, classified, table)
        result = prune_leancode(scored, config.ratio, config.protected_indices)
    elif config.method == Method.DIETCODE:
        from codetrim.baselines import prune_dietcode

        result = prune_dietcode(snippet, classified, table, config.ratio)
    elif config.method == Method.SLIMCODE:
        from codetrim.baselines import prune_slimcode

        result = prune_slimcode(snippet, classified, config.ratio)
    else:
        raise UnknownMethod(str(config.method))
    text = " ".join(t.text for t in result.kept)
    return result, text
