"""Command line: `embed` extracts vectors, `score-pairs` runs a cross-encoder."""

from __future__ import annotations

import argparse
import sys

from .embed import EmbedJob, embed
from .pairs import ScoreJob, score_pairs


def parse_layer_spec(text: str) -> tuple[int, ...] | str:
    if text == "all":
        return "all"
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"layers must be 'all' or comma-separated integers, got {text!r}"
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lscd-embed",
        description="Export contextualized target-word vectors and pair scores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    embed_p = sub.add_parser("embed", help="write an embedding store for a uses file")
    embed_p.add_argument("--model", required=True, help="checkpoint id or path")
    embed_p.add_argument("--uses", required=True, help="uses TSV")
    embed_p.add_argument("--layers", type=parse_layer_spec, default=(-1,),
                         help="'all' or comma-separated layer indices (negatives from the end)")
    embed_p.add_argument("--out", required=True, help="store file to write")
    embed_p.add_argument("--toklem", action="store_true",
                         help="substitute the target surface form with its lemma")
    embed_p.add_argument("--batch-size", type=int, default=16)
    embed_p.add_argument("--device", default="cpu")

    score_p = sub.add_parser("score-pairs", help="score usage pairs with a pair classifier")
    score_p.add_argument("--model", required=True)
    score_p.add_argument("--uses", required=True, help="uses TSV providing the contexts")
    score_p.add_argument("--pairs", required=True, help="TSV with identifier1, identifier2")
    score_p.add_argument("--out", required=True, help="scores TSV to write")
    score_p.add_argument("--batch-size", type=int, default=16)
    score_p.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "embed":
        result = embed(
            EmbedJob(
                model_id=args.model,
                uses_path=args.uses,
                out_path=args.out,
                layers=args.layers,
                toklem=args.toklem,
                batch_size=args.batch_size,
                device=args.device,
            )
        )
        print(f"wrote {result.written} record(s) to {args.out}")
    else:
        result = score_pairs(
            ScoreJob(
                model_id=args.model,
                uses_path=args.uses,
                pairs_path=args.pairs,
                out_path=args.out,
                batch_size=args.batch_size,
                device=args.device,
            )
        )
        print(f"wrote {result.written} score(s) to {args.out}")
    for item, reason in result.failures:
        print(f"skipped {item}: {reason}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
