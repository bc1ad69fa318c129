"""Seeded random search over feature-weight vectors.

The tuner samples weight vectors uniformly from per-feature intervals,
scores each by re-ranking a dev corpus and measuring its overall error
rate, and returns the minimizer. Anchor trials (the all-zero vector,
which reproduces the baseline via the tie rule, and a slid-only vector)
are prepended so the tuned result can never be worse than the baseline
on the dev set.

The hot loop evaluates trials against a precomputed table of per-candidate
feature values and edit distances. Scores are accumulated per feature in
sorted-name order — the same order `combined_score` uses — so the fast
path and the scalar path agree bit for bit and `evaluate_weights` exactly
reproduces `best_objective`.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .metrics import (
    MACRO,
    MICRO,
    edit_stats,
    metric_kind_for,
    overall_error_rate_from_counts,
    score_selection,
    tokenize,
)
from .rerank import select_rerank, validate_weights

OBJECTIVE_MACRO = "error_rate_macro"
OBJECTIVE_MICRO = "error_rate_micro"
OBJECTIVES = {OBJECTIVE_MACRO: MACRO, OBJECTIVE_MICRO: MICRO}

# Sampling intervals per canonical feature; anything else gets the fallback.
DEFAULT_RANGES: dict[str, tuple[float, float]] = {
    "lm": (0.0, 10.0),
    "asr": (0.0, 10.0),
    "uasr": (0.0, 10.0),
    "slid": (0.0, 100.0),
    "wlid": (0.0, 100.0),
    "len": (-5.0, 5.0),
}
FALLBACK_RANGE = (0.0, 10.0)

_CHUNK = 64  # trials per work unit; fixed so --jobs cannot change results


def default_search_space(feature_names: Iterable[str]) -> dict[str, tuple[float, float]]:
    """Per-feature sampling interval: lm/asr/uasr [0,10], slid/wlid [0,100], len [-5,5]."""
    return {name: DEFAULT_RANGES.get(name, FALLBACK_RANGE) for name in feature_names}


def validate_search_space(space: Mapping[str, Sequence[float]]) -> dict[str, tuple[float, float]]:
    out: dict[str, tuple[float, float]] = {}
    for name, interval in space.items():
        if not isinstance(name, str) or not name:
            raise ValueError(f"search-space feature name {name!r} is not a non-empty string")
        try:
            lo, hi = interval
        except (TypeError, ValueError):
            raise ValueError(f"search-space entry {name!r} must be a [lo, hi] pair") from None
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"search-space bounds for {name!r} must be finite")
        if lo > hi:
            raise ValueError(f"search-space bounds for {name!r} are inverted: [{lo}, {hi}]")
        out[name] = (lo, hi)
    return out


@dataclass(frozen=True)
class TunerConfig:
    space: Mapping[str, tuple[float, float]]
    iterations: int = 10000
    seed: int = 0
    objective: str = OBJECTIVE_MACRO
    include_anchors: bool = True

    def __post_init__(self) -> None:
        if not isinstance(self.iterations, int) or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations!r}")
        if self.objective not in OBJECTIVES:
            raise ValueError(
                f"unknown objective {self.objective!r}; expected one of {sorted(OBJECTIVES)}"
            )
        validate_search_space(self.space)

    @property
    def aggregation(self) -> str:
        return OBJECTIVES[self.objective]


@dataclass(frozen=True)
class Trial:
    index: int
    weights: Mapping[str, float]
    objective: float
    is_anchor: bool


@dataclass(frozen=True)
class TunerResult:
    best_weights: dict[str, float]
    best_objective: float
    best_index: int
    trials: tuple[Trial, ...]
    seed: int
    objective: str
    aggregation: str
    feature_names: tuple[str, ...]
    iterations: int
    anchor_count: int


class EvalTable:
    """Padded per-candidate arrays for evaluating many weight vectors fast.

    Feature matrices are stacked in sorted feature-name order. A trial's
    scores accumulate one feature at a time in that order, exactly like the
    scalar scoring loop, so selections and objectives match it bit for bit.
    Padding cells are masked to -inf before the per-row argmax; argmax takes
    the first maximum, which is the lowest slid_rank because candidates are
    stored rank-ascending.
    """

    def __init__(self, corpus: Corpus, feature_names: Sequence[str], aggregation: str) -> None:
        if len(corpus) == 0:
            raise ValueError("cannot build an evaluation table from an empty corpus")
        if aggregation not in (MACRO, MICRO):
            raise ValueError(f"unknown aggregation {aggregation!r}")
        self.aggregation = aggregation
        self.names: tuple[str, ...] = tuple(sorted(feature_names))
        self.utterance_ids: tuple[str, ...] = tuple(u.id for u in corpus.utterances)
        self.languages: tuple[str, ...] = tuple(corpus.languages())
        lang_pos = {lang: i for i, lang in enumerate(self.languages)}

        n_utt = len(corpus)
        n_max = corpus.max_nbest()
        n_feat = len(self.names)
        self.features = np.zeros((n_feat, n_utt, n_max), dtype=np.float64)
        self.valid = np.zeros((n_utt, n_max), dtype=bool)
        self.distance = np.zeros((n_utt, n_max), dtype=np.int64)
        self.slid_ok = np.zeros((n_utt, n_max), dtype=bool)
        self.lang_idx = np.zeros(n_utt, dtype=np.int64)
        ref_lens = np.zeros(n_utt, dtype=np.int64)

        for u, utt in enumerate(corpus.utterances):
            kind = metric_kind_for(utt.ref_language, corpus.char_languages)
            ref_units = tokenize(utt.ref_text, kind)
            ref_lens[u] = len(ref_units)
            self.lang_idx[u] = lang_pos[utt.ref_language]
            for c, cand in enumerate(utt.candidates):
                self.valid[u, c] = True
                self.slid_ok[u, c] = cand.language == utt.ref_language
                self.distance[u, c] = edit_stats(ref_units, tokenize(cand.transcript, kind)).distance
                for f, name in enumerate(self.names):
                    self.features[f, u, c] = cand.features.get(name, 0.0)

        self._rows = np.arange(n_utt)
        self._invalid = ~self.valid
        self._ref_len_per_lang = [
            int(x)
            for x in np.bincount(self.lang_idx, weights=ref_lens, minlength=len(self.languages))
        ]

    def select(self, weight_row: np.ndarray) -> np.ndarray:
        """Chosen candidate index per utterance for one weight vector."""
        n_feat, n_utt, n_max = self.features.shape
        scores = np.zeros((n_utt, n_max), dtype=np.float64)
        for f in range(n_feat):
            scores += weight_row[f] * self.features[f]
        scores[self._invalid] = -np.inf
        return np.argmax(scores, axis=1)

    def objective(self, weight_row: np.ndarray) -> float:
        """Overall error rate of the re-rank selection under one weight vector."""
        sel = self.select(weight_row)
        chosen_dist = self.distance[self._rows, sel]
        lang_dist = np.bincount(
            self.lang_idx, weights=chosen_dist, minlength=len(self.languages)
        )
        counts = [(int(d), n) for d, n in zip(lang_dist, self._ref_len_per_lang)]
        return overall_error_rate_from_counts(counts, self.aggregation)

    def slid_accuracy(self, weight_row: np.ndarray) -> float:
        sel = self.select(weight_row)
        return float(np.mean(self.slid_ok[self._rows, sel]))


def _anchor_rows(
    space: Mapping[str, tuple[float, float]],
    names: Sequence[str],
    include_anchors: bool,
    extra_anchors: Sequence[Mapping[str, float]],
) -> list[np.ndarray]:
    rows: list[np.ndarray] = []
    if include_anchors:
        rows.append(np.zeros(len(names), dtype=np.float64))
        if "slid" in space:
            lo, hi = space["slid"]
            value = 1.0 if lo <= 1.0 <= hi else (lo + hi) / 2.0
            row = np.zeros(len(names), dtype=np.float64)
            row[list(names).index("slid")] = value
            rows.append(row)
    for anchor in extra_anchors:
        anchor = validate_weights(anchor)
        outside = sorted(set(anchor) - set(names))
        if outside:
            raise ValueError(f"anchor weights use features outside the search space: {outside}")
        rows.append(np.array([anchor.get(n, 0.0) for n in names], dtype=np.float64))
    return rows


def _evaluate_rows(table: EvalTable, weight_rows: np.ndarray, jobs: int) -> list[float]:
    """Objective per row, in row order, chunked identically for any job count."""
    total = weight_rows.shape[0]
    chunks = [range(start, min(start + _CHUNK, total)) for start in range(0, total, _CHUNK)]

    def eval_chunk(rows: range) -> list[float]:
        return [table.objective(weight_rows[r]) for r in rows]

    if jobs <= 1:
        per_chunk = [eval_chunk(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_chunk = list(pool.map(eval_chunk, chunks))
    return [obj for chunk in per_chunk for obj in chunk]


def tune(
    dev: Corpus,
    config: TunerConfig,
    *,
    jobs: int = 1,
    extra_anchors: Sequence[Mapping[str, float]] = (),
) -> TunerResult:
    """Random-search the configured space for the dev-set error-rate minimizer.

    All trial vectors are sampled up-front from a PRNG seeded by
    config.seed, so results do not depend on evaluation scheduling; ties
    are broken toward the earliest trial, and anchors come first.
    """
    if len(dev) == 0:
        raise ValueError("dev corpus is empty")
    space = validate_search_space(config.space)
    if not space:
        raise ValueError("search space is empty")
    names = tuple(sorted(space))
    aggregation = config.aggregation

    lo = np.array([space[n][0] for n in names], dtype=np.float64)
    hi = np.array([space[n][1] for n in names], dtype=np.float64)
    rng = np.random.default_rng(config.seed)
    random_rows = lo + rng.random((config.iterations, len(names))) * (hi - lo)

    anchors = _anchor_rows(space, names, config.include_anchors, extra_anchors)
    if anchors:
        weight_rows = np.vstack([np.stack(anchors), random_rows])
    else:
        weight_rows = random_rows
    anchor_count = len(anchors)

    table = EvalTable(dev, names, aggregation)
    objectives = _evaluate_rows(table, weight_rows, jobs)

    best_index = -1
    best = math.inf
    for i, obj in enumerate(objectives):
        if not math.isnan(obj) and obj < best:
            best = obj
            best_index = i
    if best_index < 0:
        raise ValueError("objective is undefined on every trial (no scoreable references)")

    trials = tuple(
        Trial(
            index=i,
            weights={n: float(weight_rows[i, f]) for f, n in enumerate(names)},
            objective=float(objectives[i]),
            is_anchor=i < anchor_count,
        )
        for i in range(weight_rows.shape[0])
    )
    return TunerResult(
        best_weights=dict(trials[best_index].weights),
        best_objective=float(objectives[best_index]),
        best_index=best_index,
        trials=trials,
        seed=config.seed,
        objective=config.objective,
        aggregation=aggregation,
        feature_names=names,
        iterations=config.iterations,
        anchor_count=anchor_count,
    )


def evaluate_weights(corpus: Corpus, weights: Mapping[str, float], aggregation: str = MACRO) -> float:
    """Overall error rate of re-ranking `corpus` with `weights`.

    Defined as the composition score_selection ∘ select_rerank, so it is
    exactly the quantity the tuner minimizes.
    """
    report = score_selection(corpus, select_rerank(corpus, weights), aggregation)
    return report.overall_error_rate


def load_tuner_config(path: str | Path, feature_names: Iterable[str] = ()) -> TunerConfig:
    """Read a TunerConfig from JSON.

    Recognized keys: space (mapping name -> [lo, hi]; defaults to the
    documented ranges over `feature_names`), iterations, seed, objective
    ("error_rate_macro"/"error_rate_micro", or the shorthands
    "macro"/"micro"), include_anchors.
    """
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: tuner config must be a JSON object")
    known = {"space", "iterations", "seed", "objective", "include_anchors"}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ValueError(f"{path}: unknown tuner-config keys {unknown}; expected {sorted(known)}")

    if "space" in obj:
        space = validate_search_space(obj["space"])
    else:
        space = default_search_space(feature_names)
        if not space:
            raise ValueError(
                f"{path}: config has no 'space' and no corpus feature names were supplied"
            )
    objective = obj.get("objective", OBJECTIVE_MACRO)
    shorthand = {MACRO: OBJECTIVE_MACRO, MICRO: OBJECTIVE_MICRO}
    objective = shorthand.get(objective, objective)
    seed = obj.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ValueError(f"{path}: seed must be an integer")
    iterations = obj.get("iterations", 10000)
    if isinstance(iterations, bool) or not isinstance(iterations, int):
        raise ValueError(f"{path}: iterations must be an integer")
    include_anchors = obj.get("include_anchors", True)
    if not isinstance(include_anchors, bool):
        raise ValueError(f"{path}: include_anchors must be a boolean")
    return TunerConfig(
        space=space,
        iterations=iterations,
        seed=seed,
        objective=objective,
        include_anchors=include_anchors,
    )


def _json_num(x: float) -> float | None:
    return None if math.isnan(x) else x


def write_tuner_result(result: TunerResult, path: str | Path) -> None:
    payload = {
        "aggregation": result.aggregation,
        "anchor_count": result.anchor_count,
        "best_index": result.best_index,
        "best_objective": _json_num(result.best_objective),
        "best_weights": dict(result.best_weights),
        "feature_names": list(result.feature_names),
        "iterations": result.iterations,
        "objective": result.objective,
        "seed": result.seed,
        "trial_count": len(result.trials),
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def write_trial_log(result: TunerResult, path: str | Path) -> None:
    """CSV trial log: trial index, one column per weight, objective."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", *result.feature_names, "objective"])
        for trial in result.trials:
            writer.writerow(
                [trial.index, *(trial.weights[n] for n in result.feature_names), trial.objective]
            )
