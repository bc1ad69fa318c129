"""Error-rate and language-ID accuracy metrics.

Word error rate is used for most languages; character error rate for
languages in the corpus's char_languages set. Both reduce to edit
distance over unit sequences divided by reference length, pooled per
language before aggregation.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Corpus

WORD = "word"
CHARACTER = "character"

MACRO = "macro"  # unweighted mean of per-language pooled rates
MICRO = "micro"  # single pooled rate over all utterances
AGGREGATIONS = (MACRO, MICRO)


@dataclass(frozen=True)
class EditStats:
    """Substitution/insertion/deletion counts from a minimum-cost alignment."""

    substitutions: int
    insertions: int
    deletions: int
    ref_len: int

    @property
    def distance(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def error_rate(self) -> float:
        return pooled_rate(self.distance, self.ref_len)

    def __add__(self, other: "EditStats") -> "EditStats":
        return EditStats(
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.ref_len + other.ref_len,
        )


ZERO_STATS = EditStats(0, 0, 0, 0)


def pooled_rate(distance: int, ref_len: int) -> float:
    """Edit-distance rate; NaN marks the undefined empty-reference case."""
    if ref_len > 0:
        return distance / ref_len
    return 0.0 if distance == 0 else math.nan


def tokenize(text: str, metric_kind: str) -> list[str]:
    """Split text into scoring units.

    Word mode splits on Unicode whitespace runs; character mode yields one
    unit per non-whitespace code point.
    """
    if metric_kind == WORD:
        return text.split()
    if metric_kind == CHARACTER:
        return [ch for ch in text if not ch.isspace()]
    raise ValueError(f"unknown metric kind {metric_kind!r}")


def metric_kind_for(language: str, char_languages: frozenset[str] | set[str]) -> str:
    return CHARACTER if language in char_languages else WORD


def edit_stats(ref_units: Sequence[str], hyp_units: Sequence[str]) -> EditStats:
    """Levenshtein alignment counts between reference and hypothesis units.

    The (S, I, D) split follows a backtrace that prefers substitution over
    insertion over deletion on cost ties; only the total S+I+D (the edit
    distance) is independent of that tie-breaking.
    """
    nr, nh = len(ref_units), len(hyp_units)
    if nr == 0:
        return EditStats(0, nh, 0, 0)
    if nh == 0:
        return EditStats(0, 0, nr, nr)

    # Full distance matrix; sequences are utterance-sized so O(nr*nh) is fine.
    rows: list[list[int]] = [list(range(nh + 1))]
    for i in range(1, nr + 1):
        prev = rows[i - 1]
        cur = [i] + [0] * nh
        ref_unit = ref_units[i - 1]
        for j in range(1, nh + 1):
            sub = prev[j - 1] + (ref_unit != hyp_units[j - 1])
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            cur[j] = best
        rows.append(cur)

    subs = ins = dels = 0
    i, j = nr, nh
    while i > 0 or j > 0:
        here = rows[i][j]
        if i > 0 and j > 0 and here == rows[i - 1][j - 1] + (ref_units[i - 1] != hyp_units[j - 1]):
            if ref_units[i - 1] != hyp_units[j - 1]:
                subs += 1
            i -= 1
            j -= 1
        elif j > 0 and here == rows[i][j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return EditStats(subs, ins, dels, nr)


@dataclass(frozen=True)
class LanguageEval:
    """Pooled scoring results for one reference language."""

    language: str
    metric_kind: str
    pooled: EditStats
    utterance_count: int
    slid_correct: int

    @property
    def slid_accuracy(self) -> float:
        if self.utterance_count == 0:
            return math.nan
        return self.slid_correct / self.utterance_count

    @property
    def error_rate(self) -> float:
        return self.pooled.error_rate


@dataclass(frozen=True)
class EvalReport:
    """Corpus-level SLID accuracy and error rate with per-language rows."""

    aggregation: str
    overall_error_rate: float
    slid_accuracy: float
    per_language: tuple[LanguageEval, ...]

    @property
    def utterance_count(self) -> int:
        return sum(le.utterance_count for le in self.per_language)

    @property
    def slid_correct(self) -> int:
        return sum(le.slid_correct for le in self.per_language)

    def to_dict(self) -> dict:
        def _num(x: float) -> float | None:
            return None if isinstance(x, float) and math.isnan(x) else x

        return {
            "aggregation": self.aggregation,
            "overall_error_rate": _num(self.overall_error_rate),
            "slid_accuracy": _num(self.slid_accuracy),
            "utterances": self.utterance_count,
            "slid_correct": self.slid_correct,
            "per_language": [
                {
                    "language": le.language,
                    "metric_kind": le.metric_kind,
                    "utterances": le.utterance_count,
                    "slid_correct": le.slid_correct,
                    "slid_accuracy": _num(le.slid_accuracy),
                    "substitutions": le.pooled.substitutions,
                    "insertions": le.pooled.insertions,
                    "deletions": le.pooled.deletions,
                    "ref_len": le.pooled.ref_len,
                    "error_rate": _num(le.error_rate),
                }
                for le in self.per_language
            ],
        }


def overall_error_rate_from_counts(
    lang_counts: Sequence[tuple[int, int]], aggregation: str
) -> float:
    """Combine per-language (pooled distance, pooled ref_len) into one rate.

    Both the report path and the vectorized tuner path feed this function,
    so their objectives agree bit for bit. Languages with empty references
    and no errors count as rate 0; with errors they are undefined and are
    excluded from the macro mean.
    """
    if aggregation == MACRO:
        rates = [pooled_rate(d, n) for d, n in lang_counts]
        rates = [r for r in rates if not math.isnan(r)]
        if not rates:
            return math.nan
        return sum(rates) / len(rates)
    if aggregation == MICRO:
        total_d = sum(d for d, _ in lang_counts)
        total_n = sum(n for _, n in lang_counts)
        return pooled_rate(total_d, total_n)
    raise ValueError(f"unknown aggregation {aggregation!r}")


def _selection_choices(selection: object) -> Mapping[str, int]:
    choices = getattr(selection, "choices", selection)
    if not isinstance(choices, Mapping):
        raise TypeError("selection must be a Selection or a mapping of utterance id to index")
    return choices


def score_selection(corpus: Corpus, selection: object, aggregation: str = MACRO) -> EvalReport:
    """Score the selected candidate of every utterance against its reference.

    The metric kind (word vs character) follows the reference language.
    SLID accuracy counts utterances whose selected candidate language equals
    the reference language.
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation {aggregation!r}")
    choices = _selection_choices(selection)

    pooled: dict[str, EditStats] = {}
    counts: dict[str, int] = {}
    correct: dict[str, int] = {}
    for utt in corpus.utterances:
        if utt.id not in choices:
            raise ValueError(f"selection is missing utterance id {utt.id!r}")
        idx = choices[utt.id]
        if not 0 <= idx < len(utt.candidates):
            raise ValueError(
                f"selection index {idx} out of range for utterance {utt.id!r} "
                f"({len(utt.candidates)} candidates)"
            )
        cand = utt.candidates[idx]
        kind = metric_kind_for(utt.ref_language, corpus.char_languages)
        stats = edit_stats(tokenize(utt.ref_text, kind), tokenize(cand.transcript, kind))
        lang = utt.ref_language
        pooled[lang] = pooled.get(lang, ZERO_STATS) + stats
        counts[lang] = counts.get(lang, 0) + 1
        correct[lang] = correct.get(lang, 0) + (cand.language == utt.ref_language)

    per_language = tuple(
        LanguageEval(
            language=lang,
            metric_kind=metric_kind_for(lang, corpus.char_languages),
            pooled=pooled[lang],
            utterance_count=counts[lang],
            slid_correct=correct[lang],
        )
        for lang in sorted(pooled)
    )
    lang_counts = [(le.pooled.distance, le.pooled.ref_len) for le in per_language]
    overall = overall_error_rate_from_counts(lang_counts, aggregation)
    total = sum(counts.values())
    slid_acc = (sum(correct.values()) / total) if total else math.nan
    return EvalReport(aggregation, overall, slid_acc, per_language)


def write_report_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def write_report_csv(report: EvalReport, path: str | Path) -> None:
    """Per-language table: language, metric_kind, utterances, slid_accuracy, error_rate."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["language", "metric_kind", "utterances", "slid_accuracy", "error_rate"])
        for le in report.per_language:
            writer.writerow(
                [le.language, le.metric_kind, le.utterance_count, le.slid_accuracy, le.error_rate]
            )
