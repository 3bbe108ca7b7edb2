import math
import random
from fractions import Fraction
from itertools import combinations

import pytest

from codetrim.lexer import CodeToken, TokenKind, lex
from codetrim.pruning import (
    Method,
    PruneConfig,
    UnknownMethod,
    fallback_histogram,
    prune,
    prune_leancode,
    removal_budget,
    score_tokens,
    ScoredToken,
)
from codetrim.scores import FallbackLevel, ScoreKind, ingest, AttentionRecord
from codetrim.statements import Category, classify


def mk_scored(scores, category=Category.RETURN):
    out = []
    for i, s in enumerate(scores):
        tok = CodeToken(f"t{i}", TokenKind.IDENTIFIER, i, 1, 1 + i)
        out.append(ScoredToken(tok, category, float(s), FallbackLevel.TOKEN_CATEGORY))
    return out


def naive_prune(scores, budget):
    """The iterative remove-the-minimum loop, kept as the oracle."""
    remaining = list(range(len(scores)))
    removed = []
    for _ in range(budget):
        worst = None
        for i in remaining:
            if (
                worst is None
                or scores[i] < scores[worst]
                or (scores[i] == scores[worst] and i > worst)
            ):
                worst = i
        remaining.remove(worst)
        removed.append(worst)
    return set(removed)


def test_budget_floor_is_exact_for_tenth_ratios():
    # floor over the float product agrees with exact rational arithmetic
    for tenths in range(1, 10):
        ratio = tenths / 10
        for n in range(1, 401):
            want = (Fraction(tenths, 10) * n).__floor__()
            assert removal_budget(ratio, n) == want, (ratio, n)


def test_example_mixed_scores():
    result = prune_leancode(mk_scored([5, 1, 4, 2, 3]), 0.4)
    assert set(result.removed_indices) == {1, 3}
    assert [t.text for t in result.kept] == ["t0", "t2", "t4"]
    assert result.achieved_ratio == 40.0


def test_ratio_zero_identity():
    result = prune_leancode(mk_scored([5, 1, 4]), 0.0)
    assert result.removed_indices == ()
    assert result.achieved_ratio == 0.0
    assert len(result.kept) == 3


def test_all_equal_tie_rule():
    result = prune_leancode(mk_scored([2, 2, 2, 2]), 0.5)
    assert set(result.removed_indices) == {2, 3}


def test_exact_budget_random():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(1, 200)
        scores = [rng.random() for _ in range(n)]
        ratio = rng.choice([0.1, 0.2, 0.3, 0.4, 0.5])
        result = prune_leancode(mk_scored(scores), ratio)
        assert len(result.removed_indices) == math.floor(ratio * n)
        assert len(result.kept) == n - math.floor(ratio * n)


def test_matches_naive_oracle():
    rng = random.Random(9)
    for _ in range(300):
        n = rng.randint(1, 60)
        # plenty of duplicate scores to stress the tie rule
        scores = [rng.choice([0.0, 0.5, 1.0, 2.0, rng.random()]) for _ in range(n)]
        ratio = rng.random()
        budget = removal_budget(ratio, n)
        result = prune_leancode(mk_scored(scores), ratio)
        assert set(result.removed_indices) == naive_prune(scores, budget)


def test_nesting_across_ratios():
    rng = random.Random(13)
    for _ in range(50):
        n = rng.randint(2, 80)
        scores = [rng.choice([0.0, 1.0, rng.random()]) for _ in range(n)]
        scored = mk_scored(scores)
        previous = set()
        for ratio in [0.1, 0.2, 0.3, 0.4, 0.5]:
            removed = set(prune_leancode(scored, ratio).removed_indices)
            assert previous <= removed
            previous = removed


def test_removed_sum_is_minimal():
    rng = random.Random(17)
    for _ in range(60):
        n = rng.randint(1, 12)
        # dyadic weights keep subset sums exact
        scores = [rng.randrange(0, 64) / 64.0 for _ in range(n)]
        ratio = rng.choice([0.2, 0.3, 0.5])
        budget = math.floor(ratio * n)
        result = prune_leancode(mk_scored(scores), ratio)
        got = sum(scores[i] for i in result.removed_indices)
        best = min(
            (sum(scores[i] for i in combo) for combo in combinations(range(n), budget)),
            default=0.0,
        )
        assert got == best


def test_order_preservation():
    rng = random.Random(19)
    scores = [rng.random() for _ in range(50)]
    result = prune_leancode(mk_scored(scores), 0.4)
    indices = [t.index for t in result.kept]
    assert indices == sorted(indices)


def test_protected_indices_survive():
    result = prune_leancode(mk_scored([1, 2, 3, 4]), 0.5, protected=frozenset({0}))
    assert 0 not in result.removed_indices
    assert set(result.removed_indices) == {1, 2}


def test_config_validates_ratio():
    with pytest.raises(ValueError):
        PruneConfig(ratio=1.5)
    with pytest.raises(ValueError):
        PruneConfig(ratio=-0.1)


def make_table():
    records = []
    rng = random.Random(21)
    for text in ["int", "x", "=", "0", ";", "return", "y", "{", "}", "(", ")"]:
        for cat in [Category.RETURN, Category.VARIABLE_DECLARATION, Category.OTHER]:
            records.append(
                AttentionRecord("s", 0, text, cat, rng.random() * 5, ScoreKind.ENDE)
            )
    return ingest(records)


def test_score_tokens_levels():
    table = make_table()
    snip = lex("int x = 0 ; zz unknown")
    classified = classify(snip)
    scored = score_tokens(snip, classified, table)
    assert len(scored) == len(snip.tokens)
    # known pair for "int" inside a VariableDeclaration statement
    assert scored[0].fallback_level == FallbackLevel.TOKEN_CATEGORY
    # "zz" never seen: falls back past the token level
    zz = next(s for s in scored if s.token.text == "zz")
    assert zz.fallback_level in (FallbackLevel.CATEGORY_LOCAL, FallbackLevel.TABLE_GLOBAL)
    hist = fallback_histogram(scored)
    assert sum(hist.values()) == len(scored)


def test_prune_dispatch_equals_composition():
    table = make_table()
    snip = lex("int x = 0 ; return y ;")
    classified = classify(snip)
    config = PruneConfig(ratio=0.3, method=Method.LEANCODE)
    result, text = prune(snip, classified, table, config)
    direct = prune_leancode(score_tokens(snip, classified, table), 0.3)
    assert result.removed_indices == direct.removed_indices
    assert text == " ".join(t.text for t in direct.kept)
    # n=8, ratio 0.3 -> remove 2, keep 6
    assert len(result.kept) == 6


def test_prune_unknown_method():
    table = make_table()
    snip = lex("int x ;")
    with pytest.raises(UnknownMethod):
        prune(snip, classify(snip), table, PruneConfig(ratio=0.2, method="bogus"))


def test_achieved_ratio_matches_formula():
    from codetrim.metrics import simplified_ratio

    rng = random.Random(23)
    for _ in range(100):
        n = rng.randint(1, 300)
        scores = [rng.random() for _ in range(n)]
        ratio = rng.choice([0.1, 0.25, 0.3, 0.5])
        result = prune_leancode(mk_scored(scores), ratio)
        assert result.achieved_ratio == simplified_ratio(n, len(result.kept))
