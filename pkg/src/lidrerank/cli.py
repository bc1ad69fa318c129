"""Command-line interface.

Subcommands map one-to-one onto library operations and hand data between
stages through files only: corpora as JSONL (+ sidecar metadata), weights
and configs as JSON, selections as JSONL, reports as JSON/CSV/plain text.
Every invocation that produces output also writes a manifest recording how
the output was produced.

Exit codes: 0 success, 1 validation/runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import (
    ablate_features,
    compare_list_kinds,
    format_sweep_text,
    format_tail_text,
    subset_breakdown,
    sweep_n,
    tail_report,
    write_ablation_csv,
    write_breakdown_csv,
    write_compare_csv,
    write_json,
    write_sweep_csv,
    write_tail_csv,
)
from .corpus import LIST_KINDS, Corpus, CorpusError, load_corpus, save_corpus
from .metrics import MACRO, MICRO, score_selection, write_report_csv, write_report_json
from .rerank import (
    load_selection,
    load_weights,
    save_selection,
    save_weights,
    select_baseline,
    select_oracle,
    select_rerank,
)
from .synth import generate, load_synth_config
from .tuner import (
    OBJECTIVE_MACRO,
    OBJECTIVE_MICRO,
    TunerConfig,
    default_search_space,
    load_tuner_config,
    tune,
    write_trial_log,
    write_tuner_result,
)

_AGGREGATIONS = {"macro": MACRO, "micro": MICRO}
_OBJECTIVE_ALIASES = {
    "macro": OBJECTIVE_MACRO,
    "micro": OBJECTIVE_MICRO,
    OBJECTIVE_MACRO: OBJECTIVE_MACRO,
    OBJECTIVE_MICRO: OBJECTIVE_MICRO,
}


def _manifest_path(output: Path) -> Path:
    return output.with_suffix(".manifest.json")


def _write_manifest(
    anchor_output: Path,
    *,
    command: str,
    inputs: dict[str, str],
    outputs: dict[str, str],
    started: float,
    config: str | None = None,
    seed: int | None = None,
    params: dict | None = None,
    directory: bool = False,
) -> None:
    payload = {
        "command": command,
        "version": __version__,
        "inputs": inputs,
        "outputs": outputs,
        "config": config,
        "seed": seed,
        "params": params or {},
        "duration_seconds": round(time.monotonic() - started, 3),
    }
    path = anchor_output / "manifest.json" if directory else _manifest_path(anchor_output)
    path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _load(path: str, list_kind: str | None = None) -> Corpus:
    return load_corpus(path, list_kind=list_kind)


def _resolve_tuner_config(args: argparse.Namespace, feature_names) -> TunerConfig:
    if getattr(args, "config", None):
        cfg = load_tuner_config(args.config, feature_names)
    else:
        cfg = TunerConfig(space=default_search_space(feature_names))
    overrides: dict = {}
    if getattr(args, "iterations", None) is not None:
        overrides["iterations"] = args.iterations
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "objective", None) is not None:
        overrides["objective"] = _OBJECTIVE_ALIASES[args.objective]
    if getattr(args, "no_anchors", False):
        overrides["include_anchors"] = False
    return replace(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# Command handlers


def _cmd_validate(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus, args.list_kind)
    print(
        f"ok: {len(corpus)} utterances, {len(corpus.languages())} languages, "
        f"max n-best {corpus.max_nbest()}, list_kind={corpus.list_kind}, "
        f"features: {', '.join(corpus.feature_names()) or '(none)'}"
    )
    return 0


def _cmd_rerank(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus)
    inputs = {"corpus": args.corpus}
    if args.policy == "rerank":
        if not args.weights:
            raise ValueError("--weights is required with --policy rerank")
        weights = load_weights(args.weights)
        selection = select_rerank(corpus, weights)
        inputs["weights"] = args.weights
    elif args.policy == "baseline":
        selection = select_baseline(corpus)
    else:
        selection = select_oracle(corpus)
    out = Path(args.output)
    save_selection(selection, corpus, out)
    _write_manifest(
        out,
        command="rerank",
        inputs=inputs,
        outputs={"selection": str(out)},
        started=args._started,
        params={"policy": args.policy},
    )
    print(f"{args.policy} selection written: {out} ({len(selection)} utterances)")
    return 0


def _cmd_tune(args: argparse.Namespace) -> int:
    dev = _load(args.dev)
    config = _resolve_tuner_config(args, dev.feature_names())
    result = tune(dev, config, jobs=args.jobs)
    out = Path(args.output)
    write_tuner_result(result, out)
    outputs = {"result": str(out)}
    if args.trial_log:
        write_trial_log(result, args.trial_log)
        outputs["trial_log"] = args.trial_log
    if args.weights_out:
        save_weights(result.best_weights, args.weights_out)
        outputs["weights"] = args.weights_out
    _write_manifest(
        out,
        command="tune",
        inputs={"dev": args.dev},
        outputs=outputs,
        started=args._started,
        config=args.config,
        seed=config.seed,
        params={
            "iterations": config.iterations,
            "objective": config.objective,
            "include_anchors": config.include_anchors,
            "jobs": args.jobs,
        },
    )
    weights_str = ", ".join(f"{k}={v:.4g}" for k, v in sorted(result.best_weights.items()))
    print(
        f"best objective {result.best_objective:.6f} ({result.objective}) "
        f"at trial {result.best_index}; weights: {weights_str}"
    )
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus)
    selection = load_selection(args.selection)
    aggregation = _AGGREGATIONS[args.aggregation]
    report = score_selection(corpus, selection, aggregation)
    out = Path(args.output)
    write_report_json(report, out)
    outputs = {"report": str(out)}
    if args.csv:
        write_report_csv(report, args.csv)
        outputs["csv"] = args.csv
    _write_manifest(
        out,
        command="evaluate",
        inputs={"corpus": args.corpus, "selection": args.selection},
        outputs=outputs,
        started=args._started,
        params={"aggregation": args.aggregation},
    )
    print(
        f"slid_accuracy={report.slid_accuracy:.4f} "
        f"overall_error_rate={report.overall_error_rate:.4f} "
        f"({args.aggregation}, {report.utterance_count} utterances, "
        f"{len(report.per_language)} languages)"
    )
    return 0


def _cmd_breakdown(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus)
    selection = load_selection(args.selection)
    aggregation = _AGGREGATIONS[args.aggregation]
    breakdown = subset_breakdown(corpus, selection, aggregation)
    out = Path(args.output)
    write_json(breakdown.to_dict(), out)
    outputs = {"report": str(out)}
    if args.csv:
        write_breakdown_csv(breakdown, args.csv)
        outputs["csv"] = args.csv
    _write_manifest(
        out,
        command="breakdown",
        inputs={"corpus": args.corpus, "selection": args.selection},
        outputs=outputs,
        started=args._started,
        params={"aggregation": args.aggregation},
    )
    cs, ics = breakdown.correct_subset, breakdown.incorrect_subset
    print(
        f"slid-correct subset: {breakdown.correct_count} utterances "
        f"(slid_accuracy={cs.slid_accuracy:.4f}, error_rate={cs.overall_error_rate:.4f}); "
        f"slid-incorrect subset: {breakdown.incorrect_count} utterances "
        f"(slid_accuracy={ics.slid_accuracy:.4f}, error_rate={ics.overall_error_rate:.4f})"
    )
    return 0


def _cmd_tail(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus)
    baseline = load_selection(args.baseline)
    rerank = load_selection(args.rerank)
    report = tail_report(corpus, baseline, rerank, args.k)
    out = Path(args.output)
    write_json(report.to_dict(), out)
    outputs = {"report": str(out)}
    if args.csv:
        write_tail_csv(report, args.csv)
        outputs["csv"] = args.csv
    text = format_tail_text(report)
    if args.text:
        Path(args.text).write_text(text, encoding="utf-8")
        outputs["text"] = args.text
    _write_manifest(
        out,
        command="tail",
        inputs={"corpus": args.corpus, "baseline": args.baseline, "rerank": args.rerank},
        outputs=outputs,
        started=args._started,
        params={"k": args.k},
    )
    print(text, end="")
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    dev = _load(args.dev)
    eval_corpus = _load(args.eval)
    if args.features:
        features = [f.strip() for f in args.features.split(",") if f.strip()]
    else:
        features = list(dev.feature_names())
    config = _resolve_tuner_config(args, features)
    steps = ablate_features(
        dev, eval_corpus, features, config, select_on=args.select_on, jobs=args.jobs
    )
    out = Path(args.output)
    write_json({"select_on": args.select_on, "steps": [s.to_dict() for s in steps]}, out)
    outputs = {"report": str(out)}
    if args.csv:
        write_ablation_csv(steps, args.csv)
        outputs["csv"] = args.csv
    _write_manifest(
        out,
        command="ablate",
        inputs={"dev": args.dev, "eval": args.eval},
        outputs=outputs,
        started=args._started,
        config=args.config,
        seed=config.seed,
        params={
            "features": features,
            "select_on": args.select_on,
            "iterations": config.iterations,
            "jobs": args.jobs,
        },
    )
    for step in steps:
        print(
            f"rank {step.rank}: +{step.added_feature}  "
            f"objective={step.objective_after:.6f}"
        )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    corpus = _load(args.corpus)
    dev = _load(args.dev)
    config = _resolve_tuner_config(args, dev.feature_names())
    points = sweep_n(corpus, dev, args.max_n, config, retune=args.retune, jobs=args.jobs)
    out = Path(args.output)
    write_json({"retune": args.retune, "points": [p.to_dict() for p in points]}, out)
    outputs = {"report": str(out)}
    if args.csv:
        write_sweep_csv(points, args.csv)
        outputs["csv"] = args.csv
    text = format_sweep_text(points)
    if args.text:
        Path(args.text).write_text(text, encoding="utf-8")
        outputs["text"] = args.text
    _write_manifest(
        out,
        command="sweep",
        inputs={"corpus": args.corpus, "dev": args.dev},
        outputs=outputs,
        started=args._started,
        config=args.config,
        seed=config.seed,
        params={
            "max_n": args.max_n,
            "retune": args.retune,
            "iterations": config.iterations,
            "jobs": args.jobs,
        },
    )
    print(text, end="")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    multi = _load(args.multi)
    mono = _load(args.mono)
    dev_multi = _load(args.dev_multi)
    dev_mono = _load(args.dev_mono)
    feature_names = sorted(set(dev_multi.feature_names()) | set(dev_mono.feature_names()))
    config = _resolve_tuner_config(args, feature_names)
    report = compare_list_kinds(multi, mono, dev_multi, dev_mono, config, jobs=args.jobs)
    out = Path(args.output)
    write_json(report.to_dict(), out)
    outputs = {"report": str(out)}
    if args.csv:
        write_compare_csv(report, args.csv)
        outputs["csv"] = args.csv
    _write_manifest(
        out,
        command="compare",
        inputs={
            "multi": args.multi,
            "mono": args.mono,
            "dev_multi": args.dev_multi,
            "dev_mono": args.dev_mono,
        },
        outputs=outputs,
        started=args._started,
        config=args.config,
        seed=config.seed,
        params={"iterations": config.iterations, "jobs": args.jobs},
    )
    for row in report.rows:
        print(
            f"{row.label}: slid_accuracy={row.slid_accuracy:.4f} "
            f"error_rate={row.error_rate:.4f}"
        )
    return 0


def _cmd_gen_synth(args: argparse.Namespace) -> int:
    config = load_synth_config(args.config)
    train, dev, test = generate(config)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {}
    for split, corpus in (("train", train), ("dev", dev), ("test", test)):
        path = out_dir / f"{split}.jsonl"
        save_corpus(corpus, path)
        outputs[split] = str(path)
    _write_manifest(
        out_dir,
        command="gen-synth",
        inputs={},
        outputs=outputs,
        started=args._started,
        config=args.config,
        seed=config.seed,
        params={
            "languages": list(config.languages),
            "n_best": config.n_best,
        },
        directory=True,
    )
    print(
        f"generated {len(train)}/{len(dev)}/{len(test)} utterances "
        f"(train/dev/test) across {len(config.languages)} languages into {out_dir}"
    )
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_tuner_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="tuner config JSON (space/iterations/seed/objective)")
    sub.add_argument("--iterations", type=int, help="override: number of random trials")
    sub.add_argument("--seed", type=int, help="override: random-search seed")
    sub.add_argument(
        "--objective",
        choices=sorted(set(_OBJECTIVE_ALIASES)),
        help="override: tuning objective",
    )
    sub.add_argument(
        "--no-anchors",
        action="store_true",
        help="disable the all-zero/slid-only anchor trials",
    )
    sub.add_argument("--jobs", type=int, default=1, help="worker threads (results are identical for any value)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidrerank",
        description=(
            "Multilingual N-best re-ranking: score candidate (language, transcript) "
            "pairs with weighted features, tune the weights, and evaluate language-ID "
            "accuracy and word/character error rate."
        ),
    )
    parser.add_argument("--version", action="version", version=f"lidrerank {__version__}")
    subs = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = subs.add_parser("validate", help="check a corpus file and print a summary")
    p.add_argument("corpus")
    p.add_argument("--list-kind", choices=list(LIST_KINDS), help="override the sidecar list kind")
    p.set_defaults(func=_cmd_validate)

    p = subs.add_parser("rerank", help="select candidates by weighted feature score")
    p.add_argument("corpus")
    p.add_argument("--weights", help="weights JSON file (required for --policy rerank)")
    p.add_argument(
        "--policy",
        choices=["rerank", "baseline", "oracle"],
        default="rerank",
        help="selection policy; baseline/oracle ignore --weights",
    )
    p.add_argument("-o", "--output", required=True, help="selection JSONL output")
    p.set_defaults(func=_cmd_rerank)

    p = subs.add_parser("tune", help="random-search feature weights on a dev corpus")
    p.add_argument("dev")
    _add_tuner_flags(p)
    p.add_argument("-o", "--output", required=True, help="tuner result JSON output")
    p.add_argument("--trial-log", help="optional per-trial CSV log")
    p.add_argument("--weights-out", help="also write best weights as a rerank-ready weights JSON")
    p.set_defaults(func=_cmd_tune)

    p = subs.add_parser("evaluate", help="score a selection against references")
    p.add_argument("corpus")
    p.add_argument("--selection", required=True, help="selection JSONL file")
    p.add_argument("--aggregation", choices=sorted(_AGGREGATIONS), default="macro")
    p.add_argument("-o", "--output", required=True, help="report JSON output")
    p.add_argument("--csv", help="optional per-language CSV table")
    p.set_defaults(func=_cmd_evaluate)

    p = subs.add_parser(
        "breakdown", help="split scores by original language-ID correctness"
    )
    p.add_argument("corpus")
    p.add_argument("--selection", required=True)
    p.add_argument("--aggregation", choices=sorted(_AGGREGATIONS), default="macro")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_breakdown)

    p = subs.add_parser("tail", help="report the k lowest baseline-accuracy languages")
    p.add_argument("corpus")
    p.add_argument("--baseline", required=True, help="baseline selection JSONL")
    p.add_argument("--rerank", required=True, help="re-rank selection JSONL")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv")
    p.add_argument("--text", help="optional plain-text table output")
    p.set_defaults(func=_cmd_tail)

    p = subs.add_parser("ablate", help="greedy forward feature selection")
    p.add_argument("dev")
    p.add_argument("--eval", required=True, help="evaluation corpus")
    p.add_argument("--features", help="comma-separated feature names (default: all in dev)")
    p.add_argument(
        "--select-on",
        choices=["eval", "dev"],
        default="eval",
        help="corpus whose objective ranks candidate features",
    )
    _add_tuner_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_ablate)

    p = subs.add_parser("sweep", help="evaluate policies across N-best list sizes")
    p.add_argument("corpus")
    p.add_argument("--dev", required=True)
    p.add_argument("--max-n", type=int, required=True)
    retune = p.add_mutually_exclusive_group()
    retune.add_argument("--retune", dest="retune", action="store_true", default=True)
    retune.add_argument("--no-retune", dest="retune", action="store_false")
    _add_tuner_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv")
    p.add_argument("--text")
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser(
        "compare", help="multilingual vs monolingual candidate-list comparison"
    )
    p.add_argument("--multi", required=True)
    p.add_argument("--mono", required=True)
    p.add_argument("--dev-multi", required=True)
    p.add_argument("--dev-mono", required=True)
    _add_tuner_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_compare)

    p = subs.add_parser("gen-synth", help="generate synthetic train/dev/test corpora")
    p.add_argument("--config", required=True, help="generator config JSON")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._started = time.monotonic()
    try:
        return args.func(args)
    except (CorpusError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
