"""Linear candidate scoring and the three selection policies.

A candidate's score is a weighted sum of its named feature values.
Selection policies map each utterance to one candidate index:

- rerank:   argmax of the weighted score, ties to the lower slid_rank
- baseline: the slid_rank-1 candidate (the language identifier's top pick)
- oracle:   the reference-language candidate when present, else the
            candidate with the highest "slid" feature
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .corpus import Candidate, Corpus

RERANK = "rerank"
BASELINE = "baseline"
ORACLE = "oracle"
POLICIES = (RERANK, BASELINE, ORACLE)


def validate_weights(weights: Mapping[str, float]) -> dict[str, float]:
    """Return a plain dict copy, rejecting non-finite coefficients."""
    out: dict[str, float] = {}
    for name, value in weights.items():
        if not isinstance(name, str) or not name:
            raise ValueError(f"weight name {name!r} is not a non-empty string")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"weight {name!r} has non-numeric value {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"weight {name!r} is not finite: {value!r}")
        out[name] = value
    return out


@dataclass(frozen=True)
class Selection:
    """Chosen candidate index per utterance id, with provenance."""

    choices: Mapping[str, int]
    policy: str
    weights: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")

    def __len__(self) -> int:
        return len(self.choices)

    def __getitem__(self, utterance_id: str) -> int:
        return self.choices[utterance_id]


def combined_score(candidate: Candidate, weights: Mapping[str, float]) -> float:
    """Weighted sum of feature values; features absent from the candidate count as 0.

    Terms are accumulated in sorted feature-name order so that any two code
    paths computing this sum (including vectorized ones) agree bit for bit.
    """
    feats = candidate.features
    total = 0.0
    for name in sorted(weights):
        total += weights[name] * feats.get(name, 0.0)
    return total


def _warn_missing_features(corpus: Corpus, weights: Mapping[str, float]) -> None:
    present = set(corpus.feature_names())
    missing = sorted(n for n, w in weights.items() if w != 0.0 and n not in present)
    if missing:
        warnings.warn(
            f"weighted feature(s) {missing} appear on no candidate in corpus "
            f"{corpus.name!r}; they contribute 0 to every score",
            stacklevel=3,
        )


def select_rerank(corpus: Corpus, weights: Mapping[str, float]) -> Selection:
    """Pick the highest-scoring candidate per utterance, ties to lower slid_rank."""
    weights = validate_weights(weights)
    _warn_missing_features(corpus, weights)
    names = sorted(weights)
    choices: dict[str, int] = {}
    for utt in corpus.utterances:
        best_idx = 0
        best = combined_score(utt.candidates[0], weights)
        for idx in range(1, len(utt.candidates)):
            feats = utt.candidates[idx].features
            score = 0.0
            for name in names:
                score += weights[name] * feats.get(name, 0.0)
            # Candidates are ordered by slid_rank, so a strict comparison
            # leaves ties with the earlier (lower-rank) candidate.
            if score > best:
                best = score
                best_idx = idx
        choices[utt.id] = best_idx
    return Selection(choices, RERANK, weights)


def select_baseline(corpus: Corpus) -> Selection:
    """Pick the slid_rank-1 candidate (index 0; candidates are rank-sorted)."""
    return Selection({utt.id: 0 for utt in corpus.utterances}, BASELINE)


def select_oracle(corpus: Corpus) -> Selection:
    """Pick the reference-language candidate when the list contains one.

    If several match (possible only in monolingual lists) the lowest
    slid_rank wins; if none match, the candidate with the highest "slid"
    feature is chosen, again breaking ties toward the lower slid_rank.
    """
    choices: dict[str, int] = {}
    for utt in corpus.utterances:
        chosen = None
        for idx, cand in enumerate(utt.candidates):
            if cand.language == utt.ref_language:
                chosen = idx
                break
        if chosen is None:
            chosen = 0
            best = utt.candidates[0].features.get("slid", -math.inf)
            for idx in range(1, len(utt.candidates)):
                score = utt.candidates[idx].features.get("slid", -math.inf)
                if score > best:
                    best = score
                    chosen = idx
        choices[utt.id] = chosen
    return Selection(choices, ORACLE)


def save_weights(weights: Mapping[str, float], path: str | Path) -> None:
    weights = validate_weights(weights)
    Path(path).write_text(
        json.dumps({"weights": weights}, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def load_weights(path: str | Path) -> dict[str, float]:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict) or "weights" not in obj or not isinstance(obj["weights"], dict):
        raise ValueError(f"{path}: expected a JSON object with a 'weights' mapping")
    return validate_weights(obj["weights"])


def save_selection(selection: Selection | Mapping[str, int], corpus: Corpus, path: str | Path) -> None:
    """Write one JSONL row per utterance: id, chosen index, its language and transcript."""
    choices = getattr(selection, "choices", selection)
    with open(path, "w", encoding="utf-8") as fh:
        for utt in corpus.utterances:
            idx = choices[utt.id]
            cand = utt.candidates[idx]
            row = {
                "id": utt.id,
                "index": idx,
                "language": cand.language,
                "transcript": cand.transcript,
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def load_selection(path: str | Path) -> dict[str, int]:
    """Read a selection JSONL file into an utterance-id → index mapping."""
    choices: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if not isinstance(row, dict) or "id" not in row or "index" not in row:
                raise ValueError(f"{path}:{lineno}: selection row needs 'id' and 'index'")
            utt_id, idx = row["id"], row["index"]
            if not isinstance(utt_id, str):
                raise ValueError(f"{path}:{lineno}: 'id' must be a string")
            if isinstance(idx, bool) or not isinstance(idx, int) or idx < 0:
                raise ValueError(f"{path}:{lineno}: 'index' must be a non-negative integer")
            if utt_id in choices:
                raise ValueError(f"{path}:{lineno}: duplicate utterance id {utt_id!r}")
            choices[utt_id] = idx
    return choices
