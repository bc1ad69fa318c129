"""Analysis procedures over selections and tuned weights.

Covers the standard re-ranking analyses: splitting results by whether the
original language identifier was right, reporting the worst-performing
languages, greedy forward feature ablation, sweeping the N-best list size,
and comparing multilingual against monolingual (beam-style) candidate
lists.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Corpus, truncate_nbest
from .metrics import MACRO, EvalReport, score_selection
from .rerank import Selection, select_baseline, select_oracle, select_rerank
from .tuner import TunerConfig, default_search_space, evaluate_weights, tune


def _num(x: float) -> float | None:
    """NaN -> None for JSON serialization."""
    return None if isinstance(x, float) and math.isnan(x) else x


def _less(a: float, b: float) -> bool:
    """Ordering that pushes NaN objectives to the bottom."""
    if math.isnan(a):
        return False
    if math.isnan(b):
        return True
    return a < b


# ---------------------------------------------------------------------------
# Subset breakdown


@dataclass(frozen=True)
class SubsetBreakdown:
    """Results split by whether the rank-1 candidate language was correct."""

    correct_subset: EvalReport
    incorrect_subset: EvalReport
    correct_count: int
    incorrect_count: int

    @property
    def total(self) -> int:
        return self.correct_count + self.incorrect_count

    @property
    def correct_fraction(self) -> float:
        if self.total == 0:
            return math.nan
        return self.correct_count / self.total

    def to_dict(self) -> dict:
        return {
            "correct_count": self.correct_count,
            "incorrect_count": self.incorrect_count,
            "correct_fraction": _num(self.correct_fraction),
            "correct_subset": self.correct_subset.to_dict(),
            "incorrect_subset": self.incorrect_subset.to_dict(),
        }


def subset_breakdown(
    corpus: Corpus, selection: Selection | Mapping[str, int], aggregation: str = MACRO
) -> SubsetBreakdown:
    """Score a selection separately on utterances whose rank-1 candidate
    language matches the reference (original identifier correct) and on the
    rest."""
    correct_utts = []
    incorrect_utts = []
    for utt in corpus.utterances:
        if utt.candidates[0].language == utt.ref_language:
            correct_utts.append(utt)
        else:
            incorrect_utts.append(utt)

    def _sub(utts: list, label: str) -> Corpus:
        return Corpus(
            utterances=tuple(utts),
            list_kind=corpus.list_kind,
            char_languages=corpus.char_languages,
            name=f"{corpus.name}-{label}" if corpus.name else label,
        )

    correct_report = score_selection(_sub(correct_utts, "slid-correct"), selection, aggregation)
    incorrect_report = score_selection(
        _sub(incorrect_utts, "slid-incorrect"), selection, aggregation
    )
    return SubsetBreakdown(
        correct_subset=correct_report,
        incorrect_subset=incorrect_report,
        correct_count=len(correct_utts),
        incorrect_count=len(incorrect_utts),
    )


# ---------------------------------------------------------------------------
# Tail-language report


@dataclass(frozen=True)
class TailRow:
    language: str
    utterances: int
    baseline_slid_accuracy: float
    baseline_error_rate: float
    rerank_slid_accuracy: float
    rerank_error_rate: float


@dataclass(frozen=True)
class TailReport:
    """The k languages with the lowest baseline SLID accuracy."""

    rows: tuple[TailRow, ...]
    average: TailRow
    k: int

    def to_dict(self) -> dict:
        def row_dict(row: TailRow) -> dict:
            return {
                "language": row.language,
                "utterances": row.utterances,
                "baseline_slid_accuracy": _num(row.baseline_slid_accuracy),
                "baseline_error_rate": _num(row.baseline_error_rate),
                "rerank_slid_accuracy": _num(row.rerank_slid_accuracy),
                "rerank_error_rate": _num(row.rerank_error_rate),
            }

        return {
            "k": self.k,
            "rows": [row_dict(r) for r in self.rows],
            "average": row_dict(self.average),
        }


def tail_report(
    corpus: Corpus,
    baseline: Selection | Mapping[str, int],
    rerank: Selection | Mapping[str, int],
    k: int,
) -> TailReport:
    """Per-language baseline-vs-rerank table for the k lowest baseline-SLID
    languages, sorted ascending by baseline accuracy (ties by language
    code), plus an unweighted average row over the k rows."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    base_rep = score_selection(corpus, baseline, MACRO)
    rr_rep = score_selection(corpus, rerank, MACRO)
    rr_by_lang = {le.language: le for le in rr_rep.per_language}

    rows = []
    for le in base_rep.per_language:
        rr = rr_by_lang[le.language]
        rows.append(
            TailRow(
                language=le.language,
                utterances=le.utterance_count,
                baseline_slid_accuracy=le.slid_accuracy,
                baseline_error_rate=le.error_rate,
                rerank_slid_accuracy=rr.slid_accuracy,
                rerank_error_rate=rr.error_rate,
            )
        )
    rows.sort(key=lambda r: (r.baseline_slid_accuracy, r.language))
    rows = rows[: min(k, len(rows))]

    def _mean(values: list[float]) -> float:
        return sum(values) / len(values) if values else math.nan

    average = TailRow(
        language="average",
        utterances=sum(r.utterances for r in rows),
        baseline_slid_accuracy=_mean([r.baseline_slid_accuracy for r in rows]),
        baseline_error_rate=_mean([r.baseline_error_rate for r in rows]),
        rerank_slid_accuracy=_mean([r.rerank_slid_accuracy for r in rows]),
        rerank_error_rate=_mean([r.rerank_error_rate for r in rows]),
    )
    return TailReport(rows=tuple(rows), average=average, k=len(rows))


# ---------------------------------------------------------------------------
# Greedy forward feature ablation


@dataclass(frozen=True)
class AblationStep:
    rank: int
    added_feature: str
    objective_after: float
    weights_after: Mapping[str, float]
    dev_objective: float
    eval_objective: float

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "added_feature": self.added_feature,
            "objective_after": _num(self.objective_after),
            "dev_objective": _num(self.dev_objective),
            "eval_objective": _num(self.eval_objective),
            "weights_after": dict(self.weights_after),
        }


def ablate_features(
    dev: Corpus,
    eval_corpus: Corpus,
    feature_names: Sequence[str],
    config: TunerConfig,
    *,
    select_on: str = "eval",
    jobs: int = 1,
) -> list[AblationStep]:
    """Greedy forward feature selection.

    Starting from the empty feature set, each round tunes weights over
    (selected + one candidate feature) on dev and adds the candidate with
    the best objective. select_on="eval" ranks candidates by eval-corpus
    error rate; select_on="dev" uses the dev objective, which avoids
    evaluation-set leakage and — because the previous round's best weights
    are injected as a warm-start anchor — makes the step objectives exactly
    non-increasing. With eval_corpus identical to dev the two modes
    coincide and both guarantees hold.
    """
    if select_on not in ("eval", "dev"):
        raise ValueError(f"select_on must be 'eval' or 'dev', got {select_on!r}")
    names = sorted(set(feature_names))
    if not names:
        raise ValueError("feature_names is empty")

    base_space = dict(default_search_space(names))
    base_space.update({n: config.space[n] for n in names if n in config.space})

    selected: list[str] = []
    prev_weights: Mapping[str, float] | None = None
    steps: list[AblationStep] = []
    for round_idx in range(1, len(names) + 1):
        remaining = [n for n in names if n not in selected]
        best: tuple[float, str, object] | None = None
        for feat in remaining:
            space = {n: base_space[n] for n in (*selected, feat)}
            cfg = replace(config, space=space)
            anchors = [prev_weights] if prev_weights is not None else []
            result = tune(dev, cfg, jobs=jobs, extra_anchors=anchors)
            if select_on == "eval":
                cand_obj = evaluate_weights(eval_corpus, result.best_weights, config.aggregation)
            else:
                cand_obj = result.best_objective
            # Strict comparison over name-sorted candidates: ties go to the
            # alphabetically first feature.
            if best is None or _less(cand_obj, best[0]):
                best = (cand_obj, feat, result)
        assert best is not None
        sel_obj, feat, result = best
        if select_on == "eval":
            eval_obj = sel_obj
        else:
            eval_obj = evaluate_weights(eval_corpus, result.best_weights, config.aggregation)
        selected.append(feat)
        prev_weights = dict(result.best_weights)
        steps.append(
            AblationStep(
                rank=round_idx,
                added_feature=feat,
                objective_after=sel_obj,
                weights_after=dict(result.best_weights),
                dev_objective=result.best_objective,
                eval_objective=eval_obj,
            )
        )
    return steps


# ---------------------------------------------------------------------------
# N-best size sweep


@dataclass(frozen=True)
class SweepPoint:
    n: int
    policy: str
    slid_accuracy: float
    error_rate: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "policy": self.policy,
            "slid_accuracy": _num(self.slid_accuracy),
            "error_rate": _num(self.error_rate),
        }


def sweep_n(
    corpus: Corpus,
    dev: Corpus,
    max_n: int,
    config: TunerConfig,
    *,
    retune: bool = True,
    jobs: int = 1,
) -> list[SweepPoint]:
    """Evaluate rerank/baseline/oracle on corpora truncated to n = 1..max_n.

    With retune=True weights are tuned per truncated dev set; otherwise the
    weights tuned once at max_n are reused at every n.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    reused: Mapping[str, float] | None = None
    if not retune:
        reused = tune(truncate_nbest(dev, max_n), config, jobs=jobs).best_weights

    points: list[SweepPoint] = []
    for n in range(1, max_n + 1):
        corpus_n = truncate_nbest(corpus, n)
        dev_n = truncate_nbest(dev, n)
        if retune:
            weights = tune(dev_n, config, jobs=jobs).best_weights
        else:
            weights = reused
        selections = (
            ("rerank", select_rerank(corpus_n, weights)),
            ("baseline", select_baseline(corpus_n)),
            ("oracle", select_oracle(corpus_n)),
        )
        for policy, selection in selections:
            report = score_selection(corpus_n, selection, config.aggregation)
            points.append(
                SweepPoint(
                    n=n,
                    policy=policy,
                    slid_accuracy=report.slid_accuracy,
                    error_rate=report.overall_error_rate,
                )
            )
    return points


# ---------------------------------------------------------------------------
# Multilingual vs monolingual comparison


@dataclass(frozen=True)
class CompareRow:
    label: str
    slid_accuracy: float
    error_rate: float
    weights: Mapping[str, float] | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "slid_accuracy": _num(self.slid_accuracy),
            "error_rate": _num(self.error_rate),
            "weights": dict(self.weights) if self.weights is not None else None,
        }


@dataclass(frozen=True)
class CompareReport:
    rows: tuple[CompareRow, ...]
    aggregation: str

    def to_dict(self) -> dict:
        return {"aggregation": self.aggregation, "rows": [r.to_dict() for r in self.rows]}


def compare_list_kinds(
    multi: Corpus,
    mono: Corpus,
    dev_multi: Corpus,
    dev_mono: Corpus,
    config: TunerConfig,
    *,
    jobs: int = 1,
) -> CompareReport:
    """Tune and evaluate re-ranking separately on multilingual and
    monolingual candidate lists over the same utterances; rows: baseline,
    monolingual re-rank, multilingual re-rank."""
    multi_ids = {u.id for u in multi.utterances}
    mono_ids = {u.id for u in mono.utterances}
    if multi_ids != mono_ids:
        missing = sorted(multi_ids ^ mono_ids)[:5]
        raise ValueError(f"utterance ids differ between list kinds (e.g. {missing})")
    mono_by_id = {u.id: u for u in mono.utterances}
    for utt in multi.utterances:
        other = mono_by_id[utt.id]
        if other.ref_language != utt.ref_language or other.ref_text != utt.ref_text:
            raise ValueError(f"utterance {utt.id!r} has mismatched references between corpora")

    agg = config.aggregation
    base_report = score_selection(multi, select_baseline(multi), agg)

    mono_weights = tune(dev_mono, config, jobs=jobs).best_weights
    mono_report = score_selection(mono, select_rerank(mono, mono_weights), agg)

    multi_weights = tune(dev_multi, config, jobs=jobs).best_weights
    multi_report = score_selection(multi, select_rerank(multi, multi_weights), agg)

    rows = (
        CompareRow("baseline", base_report.slid_accuracy, base_report.overall_error_rate),
        CompareRow(
            "rerank_monolingual",
            mono_report.slid_accuracy,
            mono_report.overall_error_rate,
            mono_weights,
        ),
        CompareRow(
            "rerank_multilingual",
            multi_report.slid_accuracy,
            multi_report.overall_error_rate,
            multi_weights,
        ),
    )
    return CompareReport(rows=rows, aggregation=agg)


# ---------------------------------------------------------------------------
# Serialization helpers


def write_json(payload: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _write_csv(header: Sequence[str], rows: Sequence[Sequence], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_breakdown_csv(breakdown: SubsetBreakdown, path: str | Path) -> None:
    header = ["subset", "language", "metric_kind", "utterances", "slid_accuracy", "error_rate"]
    rows = []
    for label, report in (
        ("correct", breakdown.correct_subset),
        ("incorrect", breakdown.incorrect_subset),
    ):
        for le in report.per_language:
            rows.append(
                [label, le.language, le.metric_kind, le.utterance_count, le.slid_accuracy, le.error_rate]
            )
    _write_csv(header, rows, path)


_TAIL_HEADER = [
    "language",
    "utterances",
    "baseline_slid_accuracy",
    "baseline_error_rate",
    "rerank_slid_accuracy",
    "rerank_error_rate",
]


def _tail_rows(report: TailReport) -> list[list]:
    rows = [
        [
            r.language,
            r.utterances,
            r.baseline_slid_accuracy,
            r.baseline_error_rate,
            r.rerank_slid_accuracy,
            r.rerank_error_rate,
        ]
        for r in (*report.rows, report.average)
    ]
    return rows


def write_tail_csv(report: TailReport, path: str | Path) -> None:
    _write_csv(_TAIL_HEADER, _tail_rows(report), path)


def write_ablation_csv(steps: Sequence[AblationStep], path: str | Path) -> None:
    header = ["rank", "added_feature", "objective_after", "dev_objective", "eval_objective", "weights_after"]
    rows = [
        [
            s.rank,
            s.added_feature,
            s.objective_after,
            s.dev_objective,
            s.eval_objective,
            json.dumps(dict(s.weights_after), sort_keys=True),
        ]
        for s in steps
    ]
    _write_csv(header, rows, path)


def write_sweep_csv(points: Sequence[SweepPoint], path: str | Path) -> None:
    header = ["n", "policy", "slid_accuracy", "error_rate"]
    rows = [[p.n, p.policy, p.slid_accuracy, p.error_rate] for p in points]
    _write_csv(header, rows, path)


def write_compare_csv(report: CompareReport, path: str | Path) -> None:
    header = ["label", "slid_accuracy", "error_rate"]
    rows = [[r.label, r.slid_accuracy, r.error_rate] for r in report.rows]
    _write_csv(header, rows, path)


def format_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Fixed-width plain-text table (floats shown to 4 decimal places)."""

    def fmt(cell) -> str:
        if isinstance(cell, float):
            return "nan" if math.isnan(cell) else f"{cell:.4f}"
        return str(cell)

    text_rows = [[fmt(c) for c in row] for row in rows]
    widths = [
        max(len(header[i]), *(len(r[i]) for r in text_rows)) if text_rows else len(header[i])
        for i in range(len(header))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in text_rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def format_tail_text(report: TailReport) -> str:
    return format_table(_TAIL_HEADER, _tail_rows(report))


def format_sweep_text(points: Sequence[SweepPoint]) -> str:
    header = ["n", "policy", "slid_accuracy", "error_rate"]
    rows = [[p.n, p.policy, p.slid_accuracy, p.error_rate] for p in points]
    return format_table(header, rows)
