#!/usr/bin/env python3
"""End-to-end demonstration on synthetic data, driven through the library.

Generates a multilingual n-best corpus with a known SLID confusion profile,
tunes feature weights on the dev split, and prints the headline comparison
(baseline vs. re-ranked vs. oracle) followed by the standard analyses:
subset breakdown, tail report, greedy feature ablation, an n-best-size
sweep, and a monolingual-list comparison.

Usage:
    python3 scripts/run_synth_experiment.py [--seed N] [--languages K]
        [--per-language N] [--iterations N] [--out DIR]

With --out, all artifacts (corpora, weights, reports) are also written as
files so the same run can be replayed through the `lidrerank` CLI.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from lidrerank import (
    SynthConfig,
    TunerConfig,
    ablate_features,
    compare_list_kinds,
    default_search_space,
    derive_monolingual,
    format_sweep_text,
    format_tail_text,
    generate,
    save_corpus,
    save_weights,
    score_selection,
    select_baseline,
    select_oracle,
    select_rerank,
    subset_breakdown,
    sweep_n,
    tail_report,
    tune,
    uniform_confusion,
    write_tuner_result,
)


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=20260814, help="generator seed")
    parser.add_argument("--tuner-seed", type=int, default=7, help="random-search seed")
    parser.add_argument("--languages", type=int, default=20, help="number of languages")
    parser.add_argument(
        "--per-language", type=int, default=150, help="test utterances per language"
    )
    parser.add_argument(
        "--iterations", type=int, default=10000, help="random-search trial count"
    )
    parser.add_argument("--jobs", type=int, default=4, help="tuning worker threads")
    parser.add_argument("--out", type=Path, default=None, help="artifact directory")
    return parser.parse_args(argv)


def headline(label: str, report) -> str:
    return (
        f"{label:<22} slid_accuracy={report.slid_accuracy:.4f}  "
        f"overall_error_rate={report.overall_error_rate:.4f}"
    )


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    langs = tuple(f"l{i:02d}" for i in range(1, args.languages + 1))
    config = SynthConfig(
        languages=langs,
        utterances_per_language=args.per_language,
        n_best=5,
        slid_confusion=uniform_confusion(langs, 5, rank1=0.85, absent=0.03),
        right_lang_wer=0.12,
        wrong_lang_wer=0.75,
        feature_fidelity={"slid": 0.9, "asr": 0.5, "lm": 0.9, "wlid": 0.9, "uasr": 0.3},
        seed=args.seed,
        train_utterances=5,
        dev_utterances=max(args.per_language // 2, 1),
    )
    print(f"generating corpus: {len(langs)} languages, n_best={config.n_best} ...")
    train, dev, test = generate(config)
    print(f"  train/dev/test = {len(train)}/{len(dev)}/{len(test)} utterances")

    feature_names = sorted(test.feature_names())
    space = default_search_space(feature_names)
    tuner_config = TunerConfig(
        space=space, iterations=args.iterations, seed=args.tuner_seed
    )
    print(f"tuning {len(feature_names)} weights over {args.iterations} trials ...")
    started = time.monotonic()
    result = tune(dev, tuner_config, jobs=args.jobs)
    print(
        f"  best dev objective {result.best_objective:.4f} "
        f"at trial {result.best_index} ({time.monotonic() - started:.1f}s)"
    )
    print("  weights: " + ", ".join(f"{k}={v:.3f}" for k, v in result.best_weights.items()))

    baseline_sel = select_baseline(test)
    rerank_sel = select_rerank(test, result.best_weights)
    oracle_sel = select_oracle(test)
    baseline = score_selection(test, baseline_sel)
    reranked = score_selection(test, rerank_sel)
    oracle = score_selection(test, oracle_sel)

    print("\n== test-set comparison (macro) ==")
    print(headline("baseline (rank 1)", baseline))
    print(headline("reranked", reranked))
    print(headline("oracle", oracle))
    gap = baseline.overall_error_rate - oracle.overall_error_rate
    recovered = baseline.overall_error_rate - reranked.overall_error_rate
    if gap > 0:
        print(f"recovered {100 * recovered / gap:.1f}% of the baseline-to-oracle gap")

    print("\n== breakdown by baseline SLID correctness (reranked selection) ==")
    bd = subset_breakdown(test, rerank_sel)
    for label, sub, count in (
        ("slid-correct", bd.correct_subset, bd.correct_count),
        ("slid-incorrect", bd.incorrect_subset, bd.incorrect_count),
    ):
        print(
            f"{label:<15} utterances={count:<5} "
            f"slid_accuracy={sub.slid_accuracy:.4f} error_rate={sub.overall_error_rate:.4f}"
        )

    print("\n== tail report: 5 hardest languages by baseline accuracy ==")
    tail = tail_report(test, baseline_sel, rerank_sel, k=5)
    print(format_tail_text(tail), end="")

    print("\n== greedy feature ablation (selected on dev) ==")
    steps = ablate_features(dev, test, feature_names, tuner_config, select_on="dev")
    for step in steps:
        print(
            f"rank {step.rank}: +{step.added_feature:<6} "
            f"dev={step.dev_objective:.4f} eval={step.eval_objective:.4f}"
        )

    print("\n== n-best size sweep (retuned per n) ==")
    sweep = sweep_n(test, dev, config.n_best, tuner_config, jobs=args.jobs)
    print(format_sweep_text(sweep), end="")

    print("\n== multilingual vs monolingual lists ==")
    mono_test = derive_monolingual(test, config.n_best, seed=args.seed + 1)
    mono_dev = derive_monolingual(dev, config.n_best, seed=args.seed + 2)
    comparison = compare_list_kinds(test, mono_test, dev, mono_dev, tuner_config, jobs=args.jobs)
    for row in comparison.rows:
        print(
            f"{row.label:<22} slid_accuracy={row.slid_accuracy:.4f} "
            f"error_rate={row.error_rate:.4f}"
        )

    if args.out is not None:
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        for name, corpus in (("train", train), ("dev", dev), ("test", test)):
            save_corpus(corpus, out / f"{name}.jsonl")
        save_weights(result.best_weights, out / "weights.json")
        write_tuner_result(result, out / "tuner_result.json")
        print(f"\nartifacts written to {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
