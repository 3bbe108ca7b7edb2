import random

import pytest

from attention_extractor.align import AlignmentGap, align, token_spans


def test_token_spans_slice_back_to_texts():
    texts = ["int", "x", "=", "1", ";"]
    text = " ".join(texts)
    spans = token_spans(texts)
    assert [text[s:e] for s, e in spans] == texts


def test_identity_mapping():
    spans = token_spans(["a", "b", "c"])
    assert align(spans, spans) == [0, 1, 2]


def test_multi_subword_identifier_maps_to_one_token():
    code = token_spans(["bubbleSort", "(", ")"])
    subwords = [(0, 6), (6, 10), (11, 12), (13, 14)]
    assert align(subwords, code) == [0, 0, 1, 2]


def test_empty_spans_map_to_none():
    code = token_spans(["x"])
    assert align([(0, 0), (0, 1), (0, 0)], code) == [None, 0, None]


def test_straddling_subword_raises_with_offsets():
    code = token_spans(["ab", "cd"])
    with pytest.raises(AlignmentGap) as excinfo:
        align([(1, 4)], code)
    assert excinfo.value.start == 1
    assert excinfo.value.end == 4


def test_whitespace_only_subword_raises():
    code = token_spans(["ab", "cd"])
    with pytest.raises(AlignmentGap):
        align([(2, 3)], code)


def test_subword_past_last_token_raises():
    code = token_spans(["ab"])
    with pytest.raises(AlignmentGap):
        align([(3, 5)], code)


def test_random_fixtures_against_span_cover_oracle():
    # fabricate subwords by cutting each token span at random points; the
    # expected mapping is known from the bookkeeping that produced the cuts
    rng = random.Random(1234)
    pool = ["alpha", "x", "someLongIdentifier", "if", "(", ")", "+", "42", ";", "=="]
    for _ in range(200):
        texts = [rng.choice(pool) for _ in range(rng.randint(1, 12))]
        spans = token_spans(texts)
        subwords = [(0, 0)]
        expected = [None]
        for idx, (start, end) in enumerate(spans):
            width = end - start
            n_cuts = min(rng.randint(0, 3), width - 1)
            cuts = sorted(rng.sample(range(start + 1, end), n_cuts)) if n_cuts else []
            bounds = [start] + cuts + [end]
            for a, b in zip(bounds, bounds[1:]):
                subwords.append((a, b))
                expected.append(idx)
        subwords.append((0, 0))
        expected.append(None)
        assert align(subwords, spans) == expected
