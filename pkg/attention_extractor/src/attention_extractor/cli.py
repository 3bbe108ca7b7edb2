"""Command line front end: corpus JSONL in, score-dump JSONL out.

stdout carries the dump when --out is omitted; diagnostics go to stderr.
A final "snippets=N records=M truncated=K" summary is always printed on
stderr. Exit code 0 on success, 1 on any hard error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from attention_extractor.align import AlignmentGap
from attention_extractor.extract import ExtractionJob, ExtractorError, ScoreKind, extract

_KINDS = {"cls": ScoreKind.CLS, "ende": ScoreKind.ENDE, "self": ScoreKind.SELF_ACCUM}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attention-extractor",
        description="Extract per-code-token attention scores from a pretrained model.",
    )
    parser.add_argument("--corpus", required=True, type=Path,
                        help="JSONL corpus with one {id, code} object per line")
    parser.add_argument("--kind", required=True, choices=sorted(_KINDS),
                        help="attention signal to extract")
    parser.add_argument("--model", help="checkpoint id or path (required unless --dry-run)")
    parser.add_argument("--out", type=Path, help="output path; stdout when omitted")
    parser.add_argument("--max-length", type=int, default=512,
                        help="subword length cap; longer snippets are truncated and flagged")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--decode-steps", type=int, default=16,
                        help="generation horizon for --kind ende")
    parser.add_argument("--dry-run", action="store_true",
                        help="emit schema-valid synthetic scores without loading a model")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not args.dry_run and args.model is None:
        print("error: --model is required unless --dry-run is set", file=sys.stderr)
        return 1
    try:
        job = ExtractionJob(
            corpus=args.corpus,
            kind=_KINDS[args.kind],
            model_id=args.model,
            output=args.out,
            max_length=args.max_length,
            batch_size=args.batch_size,
            decode_steps=args.decode_steps,
            dry_run=args.dry_run,
        )
        if args.out is None:
            stats = extract(job, sys.stdout)
        else:
            with open(args.out, "w", encoding="utf-8") as sink:
                stats = extract(job, sink)
    except (ExtractorError, AlignmentGap, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"snippets={stats.snippets} records={stats.records} "
        f"truncated={stats.truncated_snippets}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
