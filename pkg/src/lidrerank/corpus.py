"""Data model and JSONL I/O for multilingual N-best corpora.

An utterance holds a reference language, a reference transcript, and an
ordered list of candidates (one per hypothesized language in multilingual
lists, or beam hypotheses sharing one language in monolingual lists).
Each candidate carries a feature-score map used for re-ranking.

Corpora are immutable after construction; every operation returns a new
value, so they are safe to share across parallel workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

MULTILINGUAL = "multilingual"
MONOLINGUAL = "monolingual"
LIST_KINDS = (MULTILINGUAL, MONOLINGUAL)

#: The six canonical feature names. Extra names are accepted and carried through.
CANONICAL_FEATURES = ("slid", "asr", "lm", "wlid", "uasr", "len")

#: Languages scored with character error rate when no explicit set is given.
DEFAULT_CHAR_LANGUAGES = frozenset(
    {"adx", "bod", "cmn", "dzo", "jpn", "khg", "khm", "lao", "mya", "tha", "yue"}
)


class CorpusError(ValueError):
    """Raised when corpus data violates the format or its invariants."""


def _check_language_tag(code: str, context: str) -> None:
    if not isinstance(code, str) or not code or any(ch.isspace() for ch in code):
        raise CorpusError(f"{context}: invalid language tag {code!r}")


@dataclass(frozen=True)
class Candidate:
    """One (language, transcript) hypothesis with its feature scores.

    ``slid_rank`` is the 1-based position the spoken-LID model assigned to
    this candidate's language (1 = top prediction). The "len" feature, when
    present, must equal the transcript's code-point count including spaces.
    """

    language: str
    transcript: str
    slid_rank: int
    features: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_language_tag(self.language, "candidate")
        if not isinstance(self.slid_rank, int) or self.slid_rank < 1:
            raise CorpusError(f"candidate {self.language!r}: slid_rank must be an integer >= 1")
        for name, value in self.features.items():
            if not isinstance(name, str) or not name:
                raise CorpusError(f"candidate {self.language!r}: bad feature name {name!r}")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise CorpusError(f"candidate {self.language!r}: feature {name!r} is not a number")
            if not math.isfinite(value):
                raise CorpusError(f"candidate {self.language!r}: feature {name!r} is not finite")
        if "len" in self.features and self.features["len"] != len(self.transcript):
            raise CorpusError(
                f"candidate {self.language!r}: 'len' feature {self.features['len']!r} "
                f"!= transcript character count {len(self.transcript)}"
            )

    @classmethod
    def build(
        cls,
        language: str,
        transcript: str,
        slid_rank: int,
        features: Mapping[str, float] | None = None,
    ) -> "Candidate":
        """Construct a candidate, filling the "len" feature when absent."""
        feats = dict(features) if features else {}
        feats.setdefault("len", float(len(transcript)))
        if isinstance(slid_rank, bool) or not isinstance(slid_rank, (int, float)):
            raise CorpusError(f"candidate {language!r}: slid_rank {slid_rank!r} is not an integer")
        if slid_rank != int(slid_rank):
            raise CorpusError(f"candidate {language!r}: slid_rank {slid_rank!r} is not an integer")
        return cls(language, transcript, int(slid_rank), feats)


@dataclass(frozen=True)
class Utterance:
    """A reference transcript plus its candidate list, sorted by slid_rank."""

    id: str
    ref_language: str
    ref_text: str
    candidates: tuple[Candidate, ...]
    audio_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("utterance id must be non-empty")
        _check_language_tag(self.ref_language, f"utterance {self.id!r}")
        if not self.candidates:
            raise CorpusError(f"utterance {self.id!r}: candidate list is empty")
        ranks = [c.slid_rank for c in self.candidates]
        if ranks != list(range(1, len(ranks) + 1)):
            raise CorpusError(
                f"utterance {self.id!r}: slid_rank values {sorted(ranks)} are not a "
                f"contiguous 1..{len(ranks)} sequence in order"
            )

    @classmethod
    def build(
        cls,
        id: str,
        ref_language: str,
        ref_text: str,
        candidates: Iterable[Candidate],
        audio_ref: str | None = None,
    ) -> "Utterance":
        """Construct an utterance, sorting candidates by slid_rank."""
        ordered = tuple(sorted(candidates, key=lambda c: c.slid_rank))
        return cls(id, ref_language, ref_text, ordered, audio_ref)


@dataclass(frozen=True)
class Corpus:
    """A set of utterances plus scoring metadata.

    ``char_languages`` lists reference languages scored with character
    error rate instead of word error rate.
    """

    utterances: tuple[Utterance, ...]
    list_kind: str = MULTILINGUAL
    char_languages: frozenset[str] = DEFAULT_CHAR_LANGUAGES
    name: str = ""

    def __post_init__(self) -> None:
        if self.list_kind not in LIST_KINDS:
            raise CorpusError(f"unknown list_kind {self.list_kind!r}")
        seen: set[str] = set()
        for utt in self.utterances:
            if utt.id in seen:
                raise CorpusError(f"duplicate utterance id {utt.id!r}")
            seen.add(utt.id)
            langs = [c.language for c in utt.candidates]
            if self.list_kind == MULTILINGUAL:
                if len(set(langs)) != len(langs):
                    raise CorpusError(
                        f"utterance {utt.id!r}: duplicate candidate language in multilingual list"
                    )
            else:
                if len(set(langs)) != 1:
                    raise CorpusError(
                        f"utterance {utt.id!r}: monolingual list has mixed languages {sorted(set(langs))}"
                    )

    def __len__(self) -> int:
        return len(self.utterances)

    def languages(self) -> list[str]:
        """Sorted reference languages present in the corpus."""
        return sorted({u.ref_language for u in self.utterances})

    def feature_names(self) -> list[str]:
        """Sorted union of feature names across all candidates."""
        names: set[str] = set()
        for utt in self.utterances:
            for cand in utt.candidates:
                names.update(cand.features)
        return sorted(names)

    def max_nbest(self) -> int:
        return max((len(u.candidates) for u in self.utterances), default=0)


def truncate_nbest(corpus: Corpus, n: int) -> Corpus:
    """Keep only candidates with slid_rank <= n in every utterance.

    Truncations nest: for m <= n, truncate(c, m) is a per-utterance prefix
    of truncate(c, n).
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    utterances = tuple(
        replace(u, candidates=u.candidates[:n]) if len(u.candidates) > n else u
        for u in corpus.utterances
    )
    return replace(corpus, utterances=utterances)


# -- JSONL interchange --
#
# One utterance per line:
#   {"id": str, "ref_language": str, "ref_text": str, "audio_ref": str?,
#    "candidates": [{"language": str, "transcript": str, "slid_rank": int,
#                    "features": {str: number}}]}
# Sidecar metadata at <stem>.meta.json:
#   {"name": str, "list_kind": "multilingual"|"monolingual", "char_languages": [str]}


def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".meta.json")


def _parse_utterance(obj: object, where: str) -> Utterance:
    if not isinstance(obj, dict):
        raise CorpusError(f"{where}: expected a JSON object, got {type(obj).__name__}")
    try:
        raw_cands = obj["candidates"]
        if not isinstance(raw_cands, list):
            raise CorpusError(f"{where}: 'candidates' must be a list")
        cands = []
        for k, rc in enumerate(raw_cands):
            if not isinstance(rc, dict):
                raise CorpusError(f"{where}: candidate {k} is not an object")
            cands.append(
                Candidate.build(
                    rc["language"], rc["transcript"], rc["slid_rank"], rc.get("features")
                )
            )
        return Utterance.build(
            obj["id"], obj["ref_language"], obj["ref_text"], cands, obj.get("audio_ref")
        )
    except KeyError as exc:
        raise CorpusError(f"{where}: missing field {exc.args[0]!r}") from None
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None


def load_corpus(
    path: str | Path,
    list_kind: str | None = None,
    char_languages: Iterable[str] | None = None,
    name: str | None = None,
) -> Corpus:
    """Load and validate a JSONL corpus.

    Metadata arguments default to the sidecar file when present, then to
    ``multilingual`` / the default character-language set / the file stem.
    Candidates are re-sorted by slid_rank and the "len" feature is filled
    from the transcript when absent.
    """
    path = Path(path)
    meta: dict = {}
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{side}: invalid sidecar JSON: {exc}") from None
    if list_kind is None:
        list_kind = meta.get("list_kind", MULTILINGUAL)
    if char_languages is None:
        char_languages = meta.get("char_languages", DEFAULT_CHAR_LANGUAGES)
    if name is None:
        name = meta.get("name", path.stem)

    utterances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {exc}") from None
            utterances.append(_parse_utterance(obj, f"{path}:{lineno}"))
    return Corpus(tuple(utterances), list_kind, frozenset(char_languages), name)


def _utterance_to_dict(utt: Utterance) -> dict:
    row = {
        "id": utt.id,
        "ref_language": utt.ref_language,
        "ref_text": utt.ref_text,
        "candidates": [
            {
                "language": c.language,
                "transcript": c.transcript,
                "slid_rank": c.slid_rank,
                # sorted so that serialization is deterministic
                "features": {k: c.features[k] for k in sorted(c.features)},
            }
            for c in utt.candidates
        ],
    }
    if utt.audio_ref is not None:
        row["audio_ref"] = utt.audio_ref
    return row


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as JSONL plus its metadata sidecar.

    Round-trip stable: ``load_corpus(path)`` after saving reproduces the
    corpus field for field, with numbers preserved exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for utt in corpus.utterances:
            fh.write(json.dumps(_utterance_to_dict(utt), ensure_ascii=False) + "\n")
    meta = {
        "name": corpus.name,
        "list_kind": corpus.list_kind,
        "char_languages": sorted(corpus.char_languages),
    }
    sidecar_path(path).write_text(
        json.dumps(meta, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
