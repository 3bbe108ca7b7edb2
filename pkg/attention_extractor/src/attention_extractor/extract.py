"""Attention-score extraction from pretrained code models.

Emits the score-dump JSONL that `codetrim build-table` ingests: one record
per (snippet, code token) with a nonnegative importance score. Three kinds:

- CLS        last-encoder-layer attention row of the CLS position, summed
             over heads; suits retrieval-style encoders.
- EnDe       cross-attention of the last decoder block, summed over heads
             per decode step; a position's score is its maximum over steps.
             Step rows are softmax-normalized per head before the head sum,
             so the max is taken over normalized rows.
- SelfAccum  last-encoder-layer attention summed over heads and all valid
             query positions.

Subword scores are summed within each code token (see align). Token
identity and statement categories come from the codetrim CLI, not from a
reimplementation, so emitted (token_index, token_text) pairs match the
primary lexer by construction.

Sequences longer than the job's max_length are truncated; every record of a
truncated snippet carries "truncated": true, and a code token is emitted
only if at least one of its subwords survived.
"""

from __future__ import annotations

import json
import subprocess
import sys
import zlib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Optional, Sequence

import torch

from attention_extractor.align import align, token_spans

__all__ = [
    "ExtractStats",
    "ExtractionJob",
    "ExtractorError",
    "ModelLoad",
    "ScoreKind",
    "cls_subword_scores",
    "ende_subword_scores",
    "extract",
    "load_model",
    "self_accum_subword_scores",
]


class ScoreKind(Enum):
    CLS = "CLS"
    ENDE = "EnDe"
    SELF_ACCUM = "SelfAccum"


class ExtractorError(RuntimeError):
    """Pipeline-level failure: primary CLI unavailable, bad corpus, bad job."""


class ModelLoad(ExtractorError):
    """Checkpoint could not be loaded or does not fit the requested kind."""


@dataclass
class ExtractionJob:
    corpus: Path
    kind: ScoreKind
    model_id: Optional[str] = None
    output: Optional[Path] = None
    layer: str = "last"
    max_length: int = 512
    batch_size: int = 8
    # EnDe only: generation horizon, i.e. how many decode steps feed the max
    decode_steps: int = 16
    dry_run: bool = False

    def __post_init__(self) -> None:
        if self.layer != "last":
            raise ValueError(f"unsupported layer policy: {self.layer!r}")
        if self.max_length < 8:
            raise ValueError("max_length must be at least 8")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.decode_steps < 1:
            raise ValueError("decode_steps must be positive")


@dataclass
class ExtractStats:
    snippets: int = 0
    records: int = 0
    truncated_snippets: int = 0


# ---------------------------------------------------------------- scoring

def cls_subword_scores(attention: torch.Tensor, cls_position: int) -> torch.Tensor:
    """Head-summed CLS row of one layer: (heads, seq, seq) -> (seq,)."""
    return attention[:, cls_position, :].sum(dim=0)


def self_accum_subword_scores(attention: torch.Tensor, query_mask: torch.Tensor) -> torch.Tensor:
    """Sum over heads and valid query positions: (heads, seq, seq) -> (seq,).

    query_mask zeroes the rows of padding positions, whose attention
    distributions are artifacts of batching, not of the snippet.
    """
    weighted = attention * query_mask.to(attention.dtype)[None, :, None]
    return weighted.sum(dim=(0, 1))


def ende_subword_scores(step_rows: Sequence[torch.Tensor]) -> torch.Tensor:
    """Elementwise max over head-summed per-step rows: [(heads, src)] -> (src,)."""
    if not step_rows:
        raise ExtractorError("no decode steps produced cross-attention")
    best = step_rows[0].sum(dim=0)
    for row in step_rows[1:]:
        best = torch.maximum(best, row.sum(dim=0))
    return best


# ------------------------------------------------------------ model loading

def _check_model(model, tokenizer, kind: ScoreKind) -> None:
    if kind is ScoreKind.ENDE and not getattr(model.config, "is_encoder_decoder", False):
        raise ModelLoad("kind EnDe requires an encoder-decoder checkpoint")
    if kind is not ScoreKind.ENDE and getattr(model.config, "is_encoder_decoder", False):
        raise ModelLoad(f"kind {kind.value} requires a plain encoder checkpoint")
    if kind is ScoreKind.CLS and tokenizer.cls_token_id is None:
        raise ModelLoad("kind CLS requires a tokenizer with a CLS token")
    if not getattr(tokenizer, "is_fast", False):
        raise ModelLoad("a fast tokenizer is required for offset mappings")


def load_model(model_id: str, kind: ScoreKind):
    """Load (model, tokenizer) for the kind; wraps hub errors as ModelLoad."""
    from transformers import AutoModel, AutoModelForSeq2SeqLM, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        if kind is ScoreKind.ENDE:
            model = AutoModelForSeq2SeqLM.from_pretrained(model_id, attn_implementation="eager")
        else:
            model = AutoModel.from_pretrained(model_id, attn_implementation="eager")
    except Exception as exc:
        raise ModelLoad(f"cannot load {model_id!r}: {exc}") from exc
    model.eval()
    _check_model(model, tokenizer, kind)
    return model, tokenizer


# ------------------------------------------- primary interface (subprocess)

def _codetrim(subcommand: str, corpus: Path) -> dict[str, dict]:
    """Run the primary CLI and index its JSONL stdout by snippet id."""
    proc = subprocess.run(
        [sys.executable, "-m", "codetrim", subcommand, "--input", str(corpus)],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        detail = proc.stderr.strip().splitlines()
        raise ExtractorError(
            f"codetrim {subcommand} failed: {detail[-1] if detail else 'no diagnostics'}"
        )
    payloads = {}
    for line in proc.stdout.splitlines():
        if line.strip():
            payload = json.loads(line)
            payloads[payload["id"]] = payload
    return payloads


@dataclass
class _Snippet:
    snippet_id: str
    texts: list[str]
    categories: list[str]
    spans: list[tuple[int, int]]
    text: str


def _load_snippets(corpus: Path) -> list[_Snippet]:
    lexed = _codetrim("lex", corpus)
    categorized = _codetrim("categorize", corpus)
    snippets = []
    for snippet_id, payload in lexed.items():
        texts = [token["text"] for token in payload["tokens"]]
        if not texts:
            continue
        categories = ["Other"] * len(texts)
        for start, end, category in categorized.get(snippet_id, {}).get("ranges", []):
            for i in range(start, min(end, len(texts))):
                categories[i] = category
        snippets.append(
            _Snippet(snippet_id, texts, categories, token_spans(texts), " ".join(texts))
        )
    return snippets


# ----------------------------------------------------------------- emission

def _emit(
    snippet: _Snippet,
    subword_scores: torch.Tensor,
    offsets: Sequence[tuple[int, int]],
    mask: Sequence[int],
    kind: ScoreKind,
    sink: IO[str],
    stats: ExtractStats,
) -> None:
    real = [(pos, (int(s), int(e))) for pos, ((s, e), keep) in enumerate(zip(offsets, mask)) if keep]
    mapping = align([span for _, span in real], snippet.spans)
    per_token = [0.0] * len(snippet.texts)
    covered = [False] * len(snippet.texts)
    max_end = 0
    for (pos, (start, end)), token_idx in zip(real, mapping):
        if token_idx is None:
            continue
        per_token[token_idx] += float(subword_scores[pos])
        covered[token_idx] = True
        max_end = max(max_end, end)
    truncated = max_end < len(snippet.text)
    for idx, text in enumerate(snippet.texts):
        if not covered[idx]:
            continue
        row = {
            "snippet_id": snippet.snippet_id,
            "token_index": idx,
            "token_text": text,
            "category": snippet.categories[idx],
            "score": per_token[idx],
            "kind": kind.value,
        }
        if truncated:
            row["truncated"] = True
        sink.write(json.dumps(row, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")
        stats.records += 1
    stats.snippets += 1
    if truncated:
        stats.truncated_snippets += 1


def _synthetic_score(text: str) -> float:
    # deterministic and strictly positive so dry runs ingest like real dumps
    return ((zlib.crc32(text.encode("utf-8")) % 4093) + 1) / 512.0


def _dry_run(snippets: list[_Snippet], kind: ScoreKind, sink: IO[str]) -> ExtractStats:
    stats = ExtractStats()
    for snippet in snippets:
        for idx, text in enumerate(snippet.texts):
            row = {
                "snippet_id": snippet.snippet_id,
                "token_index": idx,
                "token_text": text,
                "category": snippet.categories[idx],
                "score": _synthetic_score(text),
                "kind": kind.value,
            }
            sink.write(json.dumps(row, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")
            stats.records += 1
        stats.snippets += 1
    return stats


# --------------------------------------------------------------- extraction

def _encode(tokenizer, texts: list[str], max_length: int):
    return tokenizer(
        texts,
        return_tensors="pt",
        padding=True,
        truncation=True,
        max_length=max_length,
        return_offsets_mapping=True,
    )


def _cls_position(input_ids: torch.Tensor, cls_token_id: int) -> int:
    positions = (input_ids == cls_token_id).nonzero(as_tuple=True)[0]
    if positions.numel() == 0:
        raise ExtractorError("tokenizer produced no CLS position")
    return int(positions[0])


def _encoder_batch(model, tokenizer, batch: list[_Snippet], job: ExtractionJob,
                   sink: IO[str], stats: ExtractStats) -> None:
    enc = _encode(tokenizer, [snippet.text for snippet in batch], job.max_length)
    with torch.no_grad():
        out = model(
            input_ids=enc["input_ids"],
            attention_mask=enc["attention_mask"],
            output_attentions=True,
        )
    last = out.attentions[-1]
    for b, snippet in enumerate(batch):
        mask = enc["attention_mask"][b]
        if job.kind is ScoreKind.CLS:
            cls_pos = _cls_position(enc["input_ids"][b], tokenizer.cls_token_id)
            scores = cls_subword_scores(last[b], cls_pos)
        else:
            scores = self_accum_subword_scores(last[b], mask)
        _emit(snippet, scores, enc["offset_mapping"][b].tolist(), mask.tolist(),
              job.kind, sink, stats)


def _ende_snippet(model, tokenizer, snippet: _Snippet, job: ExtractionJob,
                  sink: IO[str], stats: ExtractStats) -> None:
    enc = _encode(tokenizer, [snippet.text], job.max_length)
    with torch.no_grad():
        gen = model.generate(
            input_ids=enc["input_ids"],
            attention_mask=enc["attention_mask"],
            max_new_tokens=job.decode_steps,
            do_sample=False,
            num_beams=1,
            use_cache=True,
            output_attentions=True,
            return_dict_in_generate=True,
        )
    step_rows = []
    for step in gen.cross_attentions:
        block = step[-1]  # (1, heads, queries, src); queries stays 1 with cache
        for q in range(block.shape[2]):
            step_rows.append(block[0, :, q, :])
    scores = ende_subword_scores(step_rows)
    _emit(snippet, scores, enc["offset_mapping"][0].tolist(),
          enc["attention_mask"][0].tolist(), job.kind, sink, stats)


def extract(job: ExtractionJob, sink: IO[str], model=None, tokenizer=None) -> ExtractStats:
    """Run the job, writing dump rows to sink in corpus order.

    model and tokenizer may be injected (tests, preloaded checkpoints);
    otherwise they are loaded from job.model_id.
    """
    snippets = _load_snippets(job.corpus)
    if job.dry_run:
        return _dry_run(snippets, job.kind, sink)
    if model is None or tokenizer is None:
        if job.model_id is None:
            raise ExtractorError("a model id is required unless dry_run is set")
        model, tokenizer = load_model(job.model_id, job.kind)
    else:
        _check_model(model, tokenizer, job.kind)
    model.eval()
    stats = ExtractStats()
    if job.kind is ScoreKind.ENDE:
        for snippet in snippets:
            _ende_snippet(model, tokenizer, snippet, job, sink, stats)
    else:
        for i in range(0, len(snippets), job.batch_size):
            _encoder_batch(model, tokenizer, snippets[i : i + job.batch_size],
                           job, sink, stats)
    return stats
