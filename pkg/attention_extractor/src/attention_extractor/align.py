"""Subword-to-code-token alignment by character spans.

Models consume subwords; the scoring pipeline wants one record per code
token. The extractor feeds the tokenizer the single-space joined token text,
so the tokenizer's offset mapping and the code-token spans index the same
string. Every subword must then sit inside exactly one code-token span;
a subword that straddles a boundary or covers only whitespace breaks that
contract and raises AlignmentGap with the offending byte offsets.
"""

from __future__ import annotations

import bisect
from typing import Optional, Sequence

__all__ = ["AlignmentGap", "align", "token_spans"]

Span = tuple[int, int]


class AlignmentGap(ValueError):
    """A subword span that does not sit inside exactly one code token."""

    def __init__(self, message: str, start: int, end: int) -> None:
        super().__init__(f"{message} (bytes {start}..{end})")
        self.start = start
        self.end = end


def token_spans(texts: Sequence[str]) -> list[Span]:
    """Half-open character spans of each token inside " ".join(texts)."""
    spans = []
    pos = 0
    for text in texts:
        spans.append((pos, pos + len(text)))
        pos += len(text) + 1
    return spans


def align(subword_spans: Sequence[Span], code_spans: Sequence[Span]) -> list[Optional[int]]:
    """Map each subword span to the index of the code token containing it.

    Empty spans map to None: fast tokenizers report (0, 0) for special and
    padding positions, which carry no source text. code_spans must be sorted
    and non-overlapping, which token_spans guarantees.
    """
    starts = [start for start, _ in code_spans]
    mapping: list[Optional[int]] = []
    for start, end in subword_spans:
        if start == end:
            mapping.append(None)
            continue
        if end < start:
            raise AlignmentGap("inverted subword span", start, end)
        idx = bisect.bisect_right(starts, start) - 1
        if idx < 0:
            raise AlignmentGap("subword before the first code token", start, end)
        token_start, token_end = code_spans[idx]
        if start >= token_end:
            # lands in the single space between tokens, or past the last one
            raise AlignmentGap("subword covers no code token", start, end)
        if end > token_end:
            raise AlignmentGap("subword straddles a code-token boundary", start, end)
        mapping.append(idx)
    return mapping
