"""Feature annotation: add model-derived scores to an existing corpus JSONL.

Adds any subset of {"lm", "wlid", "uasr"} to every candidate and always
fills "len" (transcript character count) where absent. Requested features
are recomputed from the models even if already present, so annotating twice
with the same models is idempotent.

Candidates whose language falls outside a feature model's coverage receive
that model's minimum score observed in this run (a fixed floor when nothing
was observed) and the feature name is listed in the candidate's
``coverage_gaps`` field instead of the candidate being dropped — dropping
would change the n-best structure the corpus encodes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .audio import read_samples
from .backends import AlignScorer, TextScorer
from .errors import AdapterError

ANNOTATABLE = ("lm", "wlid", "uasr")
_FALLBACK_FLOOR = -25.0


@dataclass(frozen=True)
class AnnotateReport:
    utterances: int
    features: tuple[str, ...]
    coverage_gaps: int  # candidate-feature pairs that received floor scores


def _load_rows(path: Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdapterError(f"{path}:{lineno}: malformed JSON: {exc}") from None
            if not isinstance(row, dict) or not isinstance(row.get("candidates"), list):
                raise AdapterError(f"{path}:{lineno}: not an utterance object")
            for cand in row["candidates"]:
                if not isinstance(cand, dict) or "transcript" not in cand or "language" not in cand:
                    raise AdapterError(f"{path}:{lineno}: malformed candidate")
            rows.append(row)
    return rows


def annotate_features(
    corpus_path: str | Path,
    which: tuple[str, ...] | list[str],
    out_path: str | Path,
    *,
    lm: TextScorer | None = None,
    wlid: TextScorer | None = None,
    uasr: AlignScorer | None = None,
) -> AnnotateReport:
    """Score every candidate with the requested feature models and rewrite
    the corpus; see the module docstring for coverage-gap handling."""
    which = tuple(dict.fromkeys(which))
    unknown = [name for name in which if name not in ANNOTATABLE]
    if unknown:
        raise AdapterError(f"unknown feature(s) {unknown}; choose from {ANNOTATABLE}")
    models = {"lm": lm, "wlid": wlid, "uasr": uasr}
    for name in which:
        if models[name] is None:
            raise AdapterError(f"feature {name!r} requested but no model was provided")

    corpus_path = Path(corpus_path)
    rows = _load_rows(corpus_path)

    # First pass: score covered candidates, tracking each model's floor.
    scores: dict[str, dict[tuple[int, int], float]] = {name: {} for name in which}
    gaps: dict[str, set[tuple[int, int]]] = {name: set() for name in which}
    audio_cache: dict[str, list[int]] = {}
    for ui, row in enumerate(rows):
        samples = None
        if "uasr" in which:
            audio_ref = row.get("audio_ref")
            if not audio_ref:
                raise AdapterError(
                    f"utterance {row.get('id')!r} has no audio_ref; "
                    "alignment scoring needs the source audio"
                )
            if audio_ref not in audio_cache:
                try:
                    audio_cache[audio_ref] = read_samples(audio_ref)
                except (OSError, ValueError) as exc:
                    raise AdapterError(f"could not read audio {audio_ref!r}: {exc}") from None
            samples = audio_cache[audio_ref]
        for ci, cand in enumerate(row["candidates"]):
            language, transcript = cand["language"], cand["transcript"]
            for name in which:
                model = models[name]
                if not model.covers(language):
                    gaps[name].add((ui, ci))
                elif name == "uasr":
                    scores[name][(ui, ci)] = model.score(samples, language, transcript)
                else:
                    scores[name][(ui, ci)] = model.score(language, transcript)

    floors = {
        name: (min(values.values()) if values else _FALLBACK_FLOOR)
        for name, values in scores.items()
    }

    # Second pass: write scores, floors, flags, and the automatic "len".
    gap_count = 0
    for ui, row in enumerate(rows):
        for ci, cand in enumerate(row["candidates"]):
            features = dict(cand.get("features") or {})
            features.setdefault("len", float(len(cand["transcript"])))
            cand_gaps = []
            for name in which:
                if (ui, ci) in gaps[name]:
                    features[name] = floors[name]
                    cand_gaps.append(name)
                    gap_count += 1
                else:
                    features[name] = scores[name][(ui, ci)]
            cand["features"] = {k: features[k] for k in sorted(features)}
            if cand_gaps:
                cand["coverage_gaps"] = cand_gaps
            else:
                cand.pop("coverage_gaps", None)

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    payload = "".join(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n" for row in rows)
    out_path.write_text(payload, encoding="utf-8")
    return AnnotateReport(utterances=len(rows), features=which, coverage_gaps=gap_count)
