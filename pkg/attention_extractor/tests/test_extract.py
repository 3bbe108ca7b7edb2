import io
import json

import pytest
import torch

from attention_extractor.extract import (
    ExtractionJob,
    ExtractorError,
    ModelLoad,
    ScoreKind,
    ende_subword_scores,
    extract,
    load_model,
)


def run_extract(corpus, kind, model=None, tokenizer=None, **kwargs):
    job = ExtractionJob(corpus=corpus, kind=kind, **kwargs)
    sink = io.StringIO()
    stats = extract(job, sink, model=model, tokenizer=tokenizer)
    rows = [json.loads(line) for line in sink.getvalue().splitlines()]
    return stats, rows


def write_corpus(tmp_path, codes):
    path = tmp_path / "corpus.jsonl"
    lines = [json.dumps({"id": f"c{i}", "code": code}) for i, code in enumerate(codes)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_job_validation(tmp_path):
    corpus = write_corpus(tmp_path, ["int x;"])
    with pytest.raises(ValueError):
        ExtractionJob(corpus=corpus, kind=ScoreKind.CLS, layer="first")
    with pytest.raises(ValueError):
        ExtractionJob(corpus=corpus, kind=ScoreKind.CLS, max_length=4)
    with pytest.raises(ValueError):
        ExtractionJob(corpus=corpus, kind=ScoreKind.CLS, batch_size=0)
    with pytest.raises(ValueError):
        ExtractionJob(corpus=corpus, kind=ScoreKind.ENDE, decode_steps=0)


def test_dry_run_is_deterministic_and_positive(corpus_path):
    stats_a, rows_a = run_extract(corpus_path, ScoreKind.CLS, dry_run=True)
    stats_b, rows_b = run_extract(corpus_path, ScoreKind.CLS, dry_run=True)
    assert rows_a == rows_b
    assert stats_a.snippets == 20
    assert stats_a.records == len(rows_a)
    assert all(row["score"] > 0 for row in rows_a)
    assert all(row["kind"] == "CLS" for row in rows_a)


def test_cls_scores_match_manual_forward(tmp_path, encoder_model, tokenizer):
    # one three-subword identifier: the record score must equal the sum of
    # its subword scores from the raw attention tensor
    corpus = write_corpus(tmp_path, ["abc"])
    _, rows = run_extract(corpus, ScoreKind.CLS, encoder_model, tokenizer)
    assert len(rows) == 1
    enc = tokenizer("abc", return_tensors="pt")
    with torch.no_grad():
        out = encoder_model(
            input_ids=enc["input_ids"],
            attention_mask=enc["attention_mask"],
            output_attentions=True,
        )
    cls_row = out.attentions[-1][0, :, 0, :].sum(dim=0)  # (seq,)
    expected = float(cls_row[1:4].sum())  # positions of the 3 content subwords
    assert rows[0]["score"] == pytest.approx(expected, abs=1e-6)


def test_self_accum_scores_match_manual_forward(tmp_path, encoder_model, tokenizer):
    corpus = write_corpus(tmp_path, ["x = 1 ;"])
    _, rows = run_extract(corpus, ScoreKind.SELF_ACCUM, encoder_model, tokenizer)
    enc = tokenizer("x = 1 ;", return_tensors="pt")
    with torch.no_grad():
        out = encoder_model(
            input_ids=enc["input_ids"],
            attention_mask=enc["attention_mask"],
            output_attentions=True,
        )
    accum = out.attentions[-1][0].sum(dim=(0, 1))  # (seq,)
    # tokens are single subwords here, at positions 1..4 after [CLS]
    for row, pos in zip(rows, range(1, 5)):
        assert row["score"] == pytest.approx(float(accum[pos]), abs=1e-6)
        assert row["kind"] == "SelfAccum"


def test_ende_max_is_at_least_first_step():
    torch.manual_seed(3)
    steps = [torch.rand(2, 9) for _ in range(5)]
    best = ende_subword_scores(steps)
    first = steps[0].sum(dim=0)
    assert bool((best >= first - 1e-7).all())
    with pytest.raises(ExtractorError):
        ende_subword_scores([])


def test_ende_end_to_end_nonnegative(tmp_path, seq2seq_model, tokenizer):
    corpus = write_corpus(tmp_path, ["return a + b;", "int y = f(x);"])
    stats, rows = run_extract(
        corpus, ScoreKind.ENDE, seq2seq_model, tokenizer, decode_steps=4
    )
    assert stats.snippets == 2
    assert rows and all(row["score"] >= 0 for row in rows)
    assert all(row["kind"] == "EnDe" for row in rows)


def test_truncation_flags_and_prefix(tmp_path, encoder_model, tokenizer):
    code = "int alpha = beta + gamma; return alpha * beta;"
    corpus = write_corpus(tmp_path, [code])
    full_stats, full_rows = run_extract(corpus, ScoreKind.CLS, encoder_model, tokenizer)
    assert full_stats.truncated_snippets == 0
    assert all("truncated" not in row for row in full_rows)

    cut_stats, cut_rows = run_extract(
        corpus, ScoreKind.CLS, encoder_model, tokenizer, max_length=16
    )
    assert cut_stats.truncated_snippets == 1
    assert 0 < len(cut_rows) < len(full_rows)
    assert all(row["truncated"] is True for row in cut_rows)
    # surviving records are a prefix of the untruncated token stream
    assert [row["token_index"] for row in cut_rows] == list(range(len(cut_rows)))
    for cut, full in zip(cut_rows, full_rows):
        assert (cut["token_index"], cut["token_text"]) == (
            full["token_index"],
            full["token_text"],
        )


def test_batch_size_does_not_change_output(corpus_path, encoder_model, tokenizer):
    _, rows_single = run_extract(
        corpus_path, ScoreKind.CLS, encoder_model, tokenizer, batch_size=1
    )
    _, rows_batched = run_extract(
        corpus_path, ScoreKind.CLS, encoder_model, tokenizer, batch_size=7
    )
    assert len(rows_single) == len(rows_batched)
    for a, b in zip(rows_single, rows_batched):
        assert (a["snippet_id"], a["token_index"], a["token_text"], a["category"]) == (
            b["snippet_id"],
            b["token_index"],
            b["token_text"],
            b["category"],
        )
        assert a["score"] == pytest.approx(b["score"], abs=1e-5)


def test_kind_model_mismatch_raises(tmp_path, encoder_model, seq2seq_model, tokenizer):
    corpus = write_corpus(tmp_path, ["int x;"])
    with pytest.raises(ModelLoad):
        run_extract(corpus, ScoreKind.ENDE, encoder_model, tokenizer)
    with pytest.raises(ModelLoad):
        run_extract(corpus, ScoreKind.CLS, seq2seq_model, tokenizer)


def test_load_model_wraps_failures():
    with pytest.raises(ModelLoad):
        load_model("no-such-checkpoint-anywhere-000", ScoreKind.CLS)


def test_missing_corpus_is_an_error(tmp_path):
    job = ExtractionJob(corpus=tmp_path / "absent.jsonl", kind=ScoreKind.CLS, dry_run=True)
    with pytest.raises(ExtractorError):
        extract(job, io.StringIO())


def test_model_required_without_dry_run(tmp_path):
    corpus = write_corpus(tmp_path, ["int x;"])
    job = ExtractionJob(corpus=corpus, kind=ScoreKind.CLS)
    with pytest.raises(ExtractorError):
        extract(job, io.StringIO())
