"""Per-code-token attention score extraction for pretrained code models."""

from attention_extractor.align import AlignmentGap, align, token_spans
from attention_extractor.extract import (
    ExtractStats,
    ExtractionJob,
    ExtractorError,
    ModelLoad,
    ScoreKind,
    extract,
    load_model,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentGap",
    "ExtractStats",
    "ExtractionJob",
    "ExtractorError",
    "ModelLoad",
    "ScoreKind",
    "align",
    "extract",
    "load_model",
    "token_spans",
]
