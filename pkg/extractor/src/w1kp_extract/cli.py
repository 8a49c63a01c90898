"""Command-line wrapper: extract embeddings, sample pair manifests.

Exit codes: 0 success, 1 I/O, 2 anything the extractor rejects.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .extract import (
    BUILTIN_BACKBONES,
    BackboneSpec,
    ExtractorError,
    extract,
    sample_pairs_manifest,
)


def cmd_extract(args) -> None:
    spec = BackboneSpec(
        name=args.backbone, resize=args.resize, l2_normalize=args.l2_normalize
    )
    result = extract(
        args.dir, spec, args.out, lenient=args.lenient, workers=args.workers
    )
    for name in result.skipped:
        print(f"skipped undecodable image: {name}", file=sys.stderr)
    print(f"wrote {result.n} x {result.dim} embeddings to {result.out_path}")


def cmd_sample_pairs(args) -> None:
    manifest = sample_pairs_manifest(args.dir, count=args.count, seed=args.seed)
    Path(args.out).write_text(json.dumps(manifest) + "\n", encoding="utf-8")
    print(f"wrote {len(manifest['pairs'])} pairs to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="w1kp-extract",
        description="Turn image directories into embedding files for the scoring kit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="embed every image in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--backbone", default="pixel_flatten", choices=list(BUILTIN_BACKBONES))
    p.add_argument("--resize", type=int, default=64)
    p.add_argument("--l2-normalize", action="store_true")
    p.add_argument("--lenient", action="store_true", help="skip undecodable images")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("sample-pairs", help="deterministic pair manifest for CDF fitting")
    p.add_argument("--dir", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_pairs)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
