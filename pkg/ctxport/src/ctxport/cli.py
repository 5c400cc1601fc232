"""CLI: export ContextStore and static-embedding files from a corpus TSV."""

from __future__ import annotations

import argparse
import logging
import sys

from .corpusio import read_corpus, write_ctxstore, write_embeddings
from .export import (
    ExportConfig, Exporter, export_context, export_static, store_comments,
    write_manifest,
)

log = logging.getLogger("ctxport")


def _config_from(args) -> ExportConfig:
    return ExportConfig(
        model=args.model,
        layers=tuple(int(x) for x in args.layers.split(",")),
        subword_pooling=args.subword_pooling,
        batch_size=args.batch_size,
        max_length=args.max_length,
        revision=args.revision,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ctxport",
        description="Per-token contextual embeddings and averaged static "
                    "vectors from a masked language model.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_shared(p):
        p.add_argument("--corpus", required=True, help="corpus TSV")
        p.add_argument("--model", default="bert-large-cased")
        p.add_argument("--revision", default=None,
                       help="model revision pin, recorded in the outputs")
        p.add_argument("--layers", default="-4,-3,-2,-1",
                       help="hidden layers to average (comma separated)")
        p.add_argument("--subword-pooling", choices=("mean", "first"),
                       default="mean")
        p.add_argument("--batch-size", type=int, default=8)
        p.add_argument("--max-length", type=int, default=512)
        p.add_argument("--out", required=True)
        p.add_argument("--manifest", default=None)

    p = sub.add_parser("context", help="one vector per instance-id token")
    add_shared(p)

    p = sub.add_parser("static", help="mean occurrence vector per key")
    add_shared(p)
    p.add_argument("--key", choices=("word", "sense"), default="word")

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from(args)
        sentences = read_corpus(args.corpus)
        exporter = Exporter(cfg)
        if args.subcommand == "context":
            entries, dim, skipped = export_context(sentences, cfg, exporter)
            write_ctxstore(entries, dim, args.out, comments=store_comments(cfg))
            if skipped:
                log.warning("%d instances had no alignable vector", skipped)
            log.info("wrote %d context vectors (dim %d)", len(entries), dim)
        else:
            entries, dim, _ = export_static(sentences, cfg, key_by=args.key,
                                            exporter=exporter)
            write_embeddings(entries, dim, args.out)
            log.info("wrote %d static vectors (dim %d)", len(entries), dim)
        manifest = args.manifest or f"{args.out}.manifest.json"
        write_manifest(cfg, args.corpus, args.out, args.subcommand, dim,
                       len(entries), manifest)
    except (ValueError, OSError) as exc:
        print(f"ctxport: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
