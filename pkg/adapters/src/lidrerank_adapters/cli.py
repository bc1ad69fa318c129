"""Command line: `lidrerank-adapters extract` and `lidrerank-adapters annotate`."""

from __future__ import annotations

import argparse
import sys

from .annotate import ANNOTATABLE, annotate_features
from .backends import get_backend
from .errors import AdapterError
from .extract import extract_nbest
from .manifest import load_manifest

VERSION = "0.1.0"


def _cmd_extract(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    slid = get_backend("slid", args.slid)
    asr = get_backend("asr", args.asr)
    report = extract_nbest(
        manifest, slid, asr, args.n_best, args.output, progress_path=args.progress
    )
    for uid, reason in report.skipped:
        print(f"skipped {uid}: {reason}", file=sys.stderr)
    print(
        f"extracted {report.extracted}/{report.total} utterances "
        f"({report.reused} reused from checkpoint) -> {args.output}"
    )
    return 0


def _cmd_annotate(args: argparse.Namespace) -> int:
    which = tuple(name.strip() for name in args.features.split(",") if name.strip())
    models = {
        name: get_backend(name, getattr(args, f"{name}_model"))
        for name in ANNOTATABLE
        if name in which
    }
    report = annotate_features(args.corpus, which, args.output, **models)
    gaps = f", {report.coverage_gaps} coverage gap(s) floored" if report.coverage_gaps else ""
    print(
        f"annotated {report.utterances} utterances "
        f"with {', '.join(report.features)}{gaps} -> {args.output}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidrerank-adapters",
        description="Build n-best corpus JSONL from audio by running "
        "SLID/ASR/LM/written-LID/alignment models.",
    )
    parser.add_argument("--version", action="version", version=f"lidrerank-adapters {VERSION}")
    subs = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = subs.add_parser(
        "extract",
        help="rank top-n languages per utterance and decode one transcript per language",
    )
    p.add_argument("manifest", help="TSV: id, audio path, reference language, reference text")
    p.add_argument("--slid", default="mock", help="SLID model id ('mock' or 'hf:<repo>')")
    p.add_argument("--asr", default="mock", help="ASR model id ('mock' or 'hf:<repo>')")
    p.add_argument("-n", "--n-best", type=int, default=3, help="languages per utterance")
    p.add_argument("-o", "--output", required=True, help="corpus JSONL to write")
    p.add_argument("--progress", help="checkpoint file (default: <output>.progress)")
    p.set_defaults(func=_cmd_extract)

    p = subs.add_parser("annotate", help="add lm/wlid/uasr feature scores to a corpus")
    p.add_argument("corpus", help="corpus JSONL to annotate")
    p.add_argument(
        "--features",
        default=",".join(ANNOTATABLE),
        help=f"comma-separated subset of {{{','.join(ANNOTATABLE)}}} (default: all)",
    )
    for name in ANNOTATABLE:
        p.add_argument(f"--{name}-model", default="mock", help=f"{name} model id")
    p.add_argument("-o", "--output", required=True, help="annotated corpus JSONL to write")
    p.set_defaults(func=_cmd_annotate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AdapterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
