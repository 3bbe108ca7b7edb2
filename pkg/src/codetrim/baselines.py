"""The two reconstructed comparison methods.

One ranks tokens through a fixed 8-level priority ladder and removes from
the bottom level up. The other selects whole statements with an exact 0/1
knapsack over token counts, then tops the kept set back up to the exact
budget with the highest-scoring removed tokens so all methods remove the
same number of tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from codetrim.lexer import CodeToken, Snippet, TokenKind
from codetrim.metrics import simplified_ratio
from codetrim.pruning import PruneResult, build_result, removal_budget, score_tokens
from codetrim.scores import ScoreTable
from codetrim.statements import Category, ClassifiedSnippet, token_categories


class BudgetTooSmall(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class LadderContext:
    token: CodeToken
    category: Category
    next_text: str | None


@dataclass(frozen=True, slots=True)
class LadderRule:
    level: int
    name: str
    matches: Callable[[LadderContext], bool]


_CONTROL_KEYWORDS = frozenset(
    """
    if else for while do switch case default break continue return try catch
    finally throw synchronized
    """.split()
)

_LITERAL_KINDS = frozenset(
    {
        TokenKind.STRING_LITERAL,
        TokenKind.CHAR_LITERAL,
        TokenKind.NUMBER_LITERAL,
        TokenKind.BOOL_NULL_LITERAL,
    }
)

# Level 1 keeps longest; level 8 is removed first. First matching rule wins.
DEFAULT_LADDER: tuple[LadderRule, ...] = (
    LadderRule(1, "signature", lambda c: c.category == Category.METHOD_SIGNATURE),
    LadderRule(
        2,
        "invoked-name",
        lambda c: c.token.kind == TokenKind.IDENTIFIER and c.next_text == "(",
    ),
    LadderRule(3, "identifier", lambda c: c.token.kind == TokenKind.IDENTIFIER),
    LadderRule(4, "literal", lambda c: c.token.kind in _LITERAL_KINDS),
    LadderRule(
        5,
        "control-keyword",
        lambda c: c.token.kind == TokenKind.KEYWORD and c.token.text in _CONTROL_KEYWORDS,
    ),
    LadderRule(6, "keyword", lambda c: c.token.kind == TokenKind.KEYWORD),
    LadderRule(
        7,
        "annotation",
        lambda c: c.token.kind == TokenKind.ANNOTATION_AT or c.category == Category.ANNOTATION,
    ),
    LadderRule(8, "symbol", lambda c: True),
)


def token_level(ctx: LadderContext, ladder: Sequence[LadderRule] = DEFAULT_LADDER) -> int:
    for rule in ladder:
        if rule.matches(ctx):
            return rule.level
    raise AssertionError("ladder is not total")


def prune_slimcode(
    snippet: Snippet,
    classified: ClassifiedSnippet,
    ratio: float,
    ladder: Sequence[LadderRule] = DEFAULT_LADDER,
) -> PruneResult:
    """Remove floor(ratio * n) tokens, lowest ladder level first, then
    highest index first within a level."""
    tokens = snippet.tokens
    cats = token_categories(snippet, classified)
    n = len(tokens)
    levels = [
        token_level(
            LadderContext(t, cats[i], tokens[i + 1].text if i + 1 < n else None),
            ladder,
        )
        for i, t in enumerate(tokens)
    ]
    budget = removal_budget(ratio, n)
    order = sorted(range(n), key=lambda i: (-levels[i], -i))
    removed = set(order[:budget])
    return build_result(tokens, cats, removed)


@dataclass(frozen=True, slots=True)
class StatementWeight:
    range: tuple[int, int]
    weight: float
    length: int


def select_statements_knapsack(
    weights: Sequence[StatementWeight], budget: int, signature: int | None = None
) -> list[int]:
    """Exact 0/1 knapsack over token counts maximizing total weight.

    The signature statement is forced kept with its length pre-deducted.
    Among equal-value solutions the lexicographically smallest kept index
    set wins.
    """
    capacity = budget
    forced: list[int] = []
    if signature is not None:
        sig_len = weights[signature].length
        if sig_len > budget:
            raise BudgetTooSmall(f"signature length {sig_len} > budget {budget}")
        capacity -= sig_len
        forced.append(signature)
    items = [i for i in range(len(weights)) if i != signature]
    k = len(items)

    best = np.zeros((k + 1, capacity + 1))
    for pos in range(k - 1, -1, -1):
        w = weights[items[pos]].weight
        length = weights[items[pos]].length
        row = best[pos + 1].copy()
        if length <= capacity:
            np.maximum(
                row[length:], best[pos + 1][: capacity - length + 1] + w, out=row[length:]
            )
        best[pos] = row

    kept = []
    c = capacity
    for pos in range(k):
        if best[pos][c] == 0.0:
            break
        w = weights[items[pos]].weight
        length = weights[items[pos]].length
        # same expression as the DP fill, so the comparison is bit-exact
        if length <= c and w + best[pos + 1][c - length] == best[pos][c]:
            kept.append(items[pos])
            c -= length
    return sorted(forced + kept)


def statement_weights(scored, classified: ClassifiedSnippet) -> list[StatementWeight]:
    out = []
    for st in classified.statements:
        weight = 0.0
        for i in range(st.start, st.end):
            weight += scored[i].score
        out.append(StatementWeight((st.start, st.end), weight, st.end - st.start))
    return out


def prune_dietcode(
    snippet: Snippet,
    classified: ClassifiedSnippet,
    table: ScoreTable,
    ratio: float,
) -> PruneResult:
    """Statement knapsack, then greedy token top-up to the exact budget.

    Phase 1 keeps whole statements within the budget n - floor(ratio * n).
    Phase 2 re-adds the highest-scoring removed tokens until the kept count
    hits the budget exactly, making results comparable across methods. The
    phase-1 ratio survives as pre_topup_ratio.
    """
    scored = score_tokens(snippet, classified, table)
    tokens = [s.token for s in scored]
    cats = [s.category for s in scored]
    n = len(tokens)
    keep_budget = n - removal_budget(ratio, n)

    weights = statement_weights(scored, classified)
    signature = next(
        (
            i
            for i, st in enumerate(classified.statements)
            if st.category == Category.METHOD_SIGNATURE
        ),
        None,
    )
    try:
        kept_statements = select_statements_knapsack(weights, keep_budget, signature)
    except BudgetTooSmall:
        sig = classified.statements[signature]
        kept_idx = set(range(sig.start, sig.start + keep_budget))
        removed = set(range(n)) - kept_idx
        return build_result(tokens, cats, removed, simplified_ratio(n, len(kept_idx)))

    kept_idx = set()
    for si in kept_statements:
        s, e = weights[si].range
        kept_idx.update(range(s, e))
    pre_topup = simplified_ratio(n, len(kept_idx))

    missing = keep_budget - len(kept_idx)
    if missing > 0:
        dropped = sorted(
            (s for s in scored if s.token.index not in kept_idx),
            key=lambda s: (-s.score, s.token.index),
        )
        kept_idx.update(s.token.index for s in dropped[:missing])
    removed = set(range(n)) - kept_idx
    return build_result(tokens, cats, removed, pre_topup)
