"""Model backends and the registry that resolves model-id flags.

Five backend roles mirror the five model-derived feature scores:

- SLID ranks candidate spoken languages for an audio clip ("slid").
- ASR transcribes audio conditioned on a language ("asr").
- LM scores transcript fluency ("lm").
- Written-LID scores how well a transcript matches a language tag ("wlid").
- The aligner scores transcript faithfulness to the audio via romanized
  alignment ("uasr").

The built-in ``mock`` family is fully offline and deterministic: it reads
the payload embedded by :func:`lidrerank_adapters.audio.synthesize_audio`
(hash-derived behavior otherwise), keeps per-language character inventories,
and scores text with per-language character-bigram models. Identifiers of
the form ``hf:<repo>`` resolve to pretrained checkpoints via
:mod:`lidrerank_adapters.hf_backends`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Protocol, runtime_checkable

from .audio import decode_payload
from .errors import AdapterError, DecodeError, UnsupportedLanguageError

MOCK_LANGUAGES = ("eng", "spa", "deu", "fra", "nld", "ita", "por", "swe", "cmn", "jpn")
MOCK_CHAR_LANGUAGES = ("cmn", "jpn")  # written without spaces, one unit per character

_CONSONANTS = "bcdfghjklmnpqrstvwz"
_VOWELS = "aeiouy"


def _h01(*parts: object) -> float:
    """Deterministic uniform float in [0, 1) derived from the arguments."""
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:7], "big") / float(1 << 56)


def _hpick(seq, *parts: object):
    return seq[int(_h01(*parts) * len(seq)) % len(seq)]


@lru_cache(maxsize=None)
def mock_vocabulary(language: str) -> tuple[str, ...]:
    """The closed unit inventory the mock family assumes for a language:
    syllables for space-separated languages, single characters otherwise."""
    if language in MOCK_CHAR_LANGUAGES:
        base = 0x4E00 + 0x0400 * MOCK_CHAR_LANGUAGES.index(language)
        return tuple(chr(base + i) for i in range(48))
    index = sum(language.encode("utf-8")) % len(_CONSONANTS)
    consonants = [_CONSONANTS[(index + 2 * k) % len(_CONSONANTS)] for k in range(7)]
    vowels = [_VOWELS[(index + k) % len(_VOWELS)] for k in range(3)]
    units = [c + v for c in consonants for v in vowels]
    units += [c + v + consonants[(i + 3) % 7] for i, c in enumerate(consonants) for v in vowels[:2]]
    return tuple(units)


def mock_text(language: str, *parts: object, words: int = 4) -> str:
    """A deterministic pseudo-sentence in the language's inventory."""
    vocab = mock_vocabulary(language)
    tokens = []
    for k in range(words):
        syllables = 1 + int(_h01(language, "wlen", k, *parts) * 3)
        tokens.append(
            "".join(_hpick(vocab, language, "syl", k, s, *parts) for s in range(syllables))
        )
    return "".join(tokens) if language in MOCK_CHAR_LANGUAGES else " ".join(tokens)


class _CharBigram:
    """Add-half-smoothed character bigram model over a language's inventory."""

    def __init__(self, language: str):
        vocab = mock_vocabulary(language)
        joiner = "" if language in MOCK_CHAR_LANGUAGES else " "
        counts: dict[str, dict[str, float]] = {}
        charset: set[str] = {joiner} if joiner else set()
        for i, left in enumerate(vocab):
            right = vocab[(i * 7 + 3) % len(vocab)]
            for text in (left, left + joiner + right):
                charset.update(text)
                for a, b in zip(text, text[1:]):
                    counts.setdefault(a, {})[b] = counts.get(a, {}).get(b, 0.0) + 1.0
        self._counts = counts
        self._charset = charset

    def log_likelihood(self, text: str) -> float:
        """Mean bigram log-probability; texts outside the inventory floor out."""
        if len(text) < 2:
            return -6.0 if not text else -3.0
        vocab_size = len(self._charset | set(text))
        total = 0.0
        for a, b in zip(text, text[1:]):
            row = self._counts.get(a, {})
            row_total = sum(row.values())
            total += math.log((row.get(b, 0.0) + 0.5) / (row_total + 0.5 * vocab_size))
        return total / (len(text) - 1)


@lru_cache(maxsize=None)
def _bigram(language: str) -> _CharBigram:
    return _CharBigram(language)


@lru_cache(maxsize=None)
def _romanize_unit(codepoint: int) -> str:
    return _CONSONANTS[codepoint % len(_CONSONANTS)] + _VOWELS[(codepoint // 7) % len(_VOWELS)]


def romanize(text: str) -> str:
    """Map arbitrary text onto a lowercase ASCII skeleton (deterministic)."""
    out = []
    for ch in text:
        if ch.isspace():
            continue
        if ord(ch) < 128:
            out.append(ch.lower())
        else:
            out.append(_romanize_unit(ord(ch)))
    return "".join(out)


def _edit_distance(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


# ---------------------------------------------------------------------------
# Backend protocols


@runtime_checkable
class SlidBackend(Protocol):
    languages: tuple[str, ...]

    def rank_languages(self, samples: list[int], n: int) -> list[tuple[str, float]]:
        """Top-n (language, log-probability) pairs, best first."""


@runtime_checkable
class AsrBackend(Protocol):
    languages: tuple[str, ...]

    def transcribe(self, samples: list[int], language: str) -> tuple[str, float]:
        """Greedy transcript and its sequence log-likelihood."""


@runtime_checkable
class TextScorer(Protocol):
    def covers(self, language: str) -> bool: ...

    def score(self, language: str, transcript: str) -> float: ...


@runtime_checkable
class AlignScorer(Protocol):
    def covers(self, language: str) -> bool: ...

    def score(self, samples: list[int], language: str, transcript: str) -> float: ...


# ---------------------------------------------------------------------------
# Mock family


@dataclass(frozen=True)
class MockSlid:
    """Ranks languages by payload match plus content-derived pseudo-noise.

    With probability ``noise`` (per utterance, hash-derived) the payload
    language loses its margin, so top-1 accuracy is roughly 1 - noise.
    """

    languages: tuple[str, ...] = MOCK_LANGUAGES
    noise: float = 0.15

    def rank_languages(self, samples: list[int], n: int) -> list[tuple[str, float]]:
        if n < 1:
            raise AdapterError(f"n must be >= 1, got {n}")
        digest = hashlib.sha256(str(samples).encode("utf-8")).hexdigest()
        payload = decode_payload(samples)
        spoken = payload[0] if payload else None
        confused = _h01(digest, "confuse") < self.noise
        raw = {}
        for lang in self.languages:
            raw[lang] = 2.0 * _h01(digest, "slid", lang)
            if lang == spoken and not confused:
                raw[lang] += 3.0
            elif lang == spoken:
                raw[lang] += 1.0
        log_z = math.log(sum(math.exp(v) for v in raw.values()))
        ranked = sorted(raw, key=lambda lang: (-raw[lang], lang))
        return [(lang, raw[lang] - log_z) for lang in ranked[: min(n, len(ranked))]]


@dataclass(frozen=True)
class MockAsr:
    """Decodes the payload text when conditioned on the spoken language and
    an inventory-drawn pseudo-transcript otherwise; greedy, so rerunning on
    the same audio and language always yields the same transcript."""

    languages: tuple[str, ...] = MOCK_LANGUAGES

    def transcribe(self, samples: list[int], language: str) -> tuple[str, float]:
        if language not in self.languages:
            raise UnsupportedLanguageError(f"ASR model does not support {language!r}")
        payload = decode_payload(samples)
        digest = hashlib.sha256(str(samples).encode("utf-8")).hexdigest()
        if payload and payload[0] == language:
            transcript = payload[1]
            loglik = -0.05 * len(transcript) - 0.2 * _h01(digest, "asr", language)
        else:
            words = 3 + int(_h01(digest, "asrlen", language) * 3)
            transcript = mock_text(language, digest, words=words)
            loglik = -0.4 * len(transcript) - 1.0 - _h01(digest, "asr", language)
        return transcript, loglik


@dataclass(frozen=True)
class MockLm:
    """Transcript fluency under the candidate language's bigram model."""

    coverage: frozenset[str] = frozenset(MOCK_LANGUAGES)

    def covers(self, language: str) -> bool:
        return language in self.coverage

    def score(self, language: str, transcript: str) -> float:
        if not self.covers(language):
            raise UnsupportedLanguageError(f"LM does not cover {language!r}")
        return _bigram(language).log_likelihood(transcript)


@dataclass(frozen=True)
class MockWlid:
    """Log-posterior of the language tag given the transcript, from the
    per-language bigram likelihoods under a uniform prior."""

    coverage: frozenset[str] = frozenset(MOCK_LANGUAGES)
    inventory: tuple[str, ...] = MOCK_LANGUAGES

    def covers(self, language: str) -> bool:
        return language in self.coverage

    def score(self, language: str, transcript: str) -> float:
        if not self.covers(language):
            raise UnsupportedLanguageError(f"written-LID does not cover {language!r}")
        scale = max(len(transcript) - 1, 1)
        lls = {lang: _bigram(lang).log_likelihood(transcript) * scale for lang in self.inventory}
        peak = max(lls.values())
        log_z = peak + math.log(sum(math.exp(v - peak) for v in lls.values()))
        return lls.get(language, min(lls.values())) - log_z


@dataclass(frozen=True)
class MockUasr:
    """Alignment score: negated normalized edit distance between the
    romanized transcript and the romanization of what the audio encodes."""

    coverage: frozenset[str] = frozenset(MOCK_LANGUAGES)

    def covers(self, language: str) -> bool:
        return language in self.coverage

    def score(self, samples: list[int], language: str, transcript: str) -> float:
        if not self.covers(language):
            raise UnsupportedLanguageError(f"aligner does not cover {language!r}")
        payload = decode_payload(samples)
        if payload:
            spoken = romanize(payload[1])
        else:
            digest = hashlib.sha256(str(samples).encode("utf-8")).hexdigest()
            spoken = romanize(mock_text("eng", digest, "uasr"))
        hyp = romanize(transcript)
        denom = max(len(spoken), len(hyp), 1)
        return -_edit_distance(spoken, hyp) / denom


@dataclass(frozen=True)
class _MockFamily:
    slid: MockSlid = field(default_factory=MockSlid)
    asr: MockAsr = field(default_factory=MockAsr)
    lm: MockLm = field(default_factory=MockLm)
    wlid: MockWlid = field(default_factory=MockWlid)
    uasr: MockUasr = field(default_factory=MockUasr)


_MOCK = _MockFamily()
BACKEND_KINDS = ("slid", "asr", "lm", "wlid", "uasr")


def get_backend(kind: str, model_id: str):
    """Resolve a model identifier: ``mock`` or ``hf:<repo>``."""
    if kind not in BACKEND_KINDS:
        raise AdapterError(f"unknown backend kind {kind!r}; expected one of {BACKEND_KINDS}")
    if model_id == "mock":
        return getattr(_MOCK, kind)
    if model_id.startswith("hf:"):
        from . import hf_backends

        return hf_backends.load(kind, model_id[3:])
    raise AdapterError(f"unknown model id {model_id!r}; expected 'mock' or 'hf:<repo>'")
