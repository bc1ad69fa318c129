"""Synthetic multilingual N-best corpus generator.

Builds seeded, fully deterministic corpora whose difficulty is controlled
by three knobs:

- slid_confusion: per reference language, the probability that the correct
  language lands at each slid_rank (last column: absent from the list);
- right/wrong_lang_wer: mean corruption rate of candidate transcripts
  decoded under the correct vs. an incorrect language;
- feature_fidelity: per feature name, how strongly the feature separates
  correct-language from wrong-language candidates (1 = perfect, 0 = noise).

Languages have pairwise-disjoint vocabularies (consonant-vowel syllable
partitioning for word languages; disjoint ideograph blocks for character
languages) so written-language signals are meaningful and both WER and CER
paths get exercised.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import MONOLINGUAL, MULTILINGUAL, Candidate, Corpus, Utterance
from .metrics import CHARACTER, WORD, metric_kind_for, tokenize

# Feature value model: BASE + MARGIN*fidelity*[candidate language is correct]
# + SIGMA*(1-fidelity)*standard_normal. Fidelity 1 gives a deterministic
# margin; fidelity 0 gives pure noise.
FEATURE_BASE = -3.0
FEATURE_MARGIN = 2.0
FEATURE_SIGMA = 2.0

# Corruption budget split between operation kinds.
_SUB_SHARE = 0.70
_INS_SHARE = 0.15
_DEL_SHARE = 0.15

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"
_CHAR_BLOCK_START = 0x4E00  # CJK unified ideographs; one 256-codepoint block per language
_CHAR_BLOCK_SIZE = 256

SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters; see module docstring for knob semantics."""

    languages: tuple[str, ...]
    utterances_per_language: int
    n_best: int
    slid_confusion: tuple[tuple[float, ...], ...]
    right_lang_wer: float
    wrong_lang_wer: float
    feature_fidelity: Mapping[str, float]
    seed: int
    char_languages: tuple[str, ...] | None = None  # None -> last language
    train_utterances: int | None = None  # per-split overrides of utterances_per_language
    dev_utterances: int | None = None
    test_utterances: int | None = None
    ref_len_range: tuple[int, int] = (3, 9)
    vocab_size: int = 60

    def __post_init__(self) -> None:
        langs = tuple(self.languages)
        if not langs:
            raise ValueError("languages must be non-empty")
        if len(set(langs)) != len(langs):
            raise ValueError("languages must be unique")
        for lang in langs:
            if not isinstance(lang, str) or not lang or any(ch.isspace() for ch in lang):
                raise ValueError(f"bad language tag {lang!r}")
        if not isinstance(self.n_best, int) or self.n_best < 1:
            raise ValueError(f"n_best must be a positive integer, got {self.n_best!r}")
        if self.n_best > len(langs):
            raise ValueError(
                f"n_best={self.n_best} exceeds language count {len(langs)} "
                "(multilingual lists need pairwise-distinct languages)"
            )
        rows = self.slid_confusion
        if len(rows) != len(langs):
            raise ValueError(
                f"slid_confusion needs one row per language ({len(langs)}), got {len(rows)}"
            )
        for li, row in enumerate(rows):
            if len(row) != self.n_best + 1:
                raise ValueError(
                    f"slid_confusion row for {langs[li]!r} needs n_best+1={self.n_best + 1} "
                    f"entries (ranks 1..{self.n_best} plus absent), got {len(row)}"
                )
            if any(not math.isfinite(p) or p < 0 for p in row):
                raise ValueError(f"slid_confusion row for {langs[li]!r} has negative entries")
            if abs(sum(row) - 1.0) > 1e-9:
                raise ValueError(
                    f"slid_confusion row for {langs[li]!r} sums to {sum(row)!r}, expected 1"
                )
            if row[-1] > 0 and self.n_best > len(langs) - 1:
                raise ValueError(
                    "absent probability requires n_best <= language count - 1 "
                    "(all ranks must be filled by other languages)"
                )
        for label, rate in (("right_lang_wer", self.right_lang_wer), ("wrong_lang_wer", self.wrong_lang_wer)):
            if not (isinstance(rate, (int, float)) and 0.0 <= rate <= 1.0):
                raise ValueError(f"{label} must be in [0, 1], got {rate!r}")
        if self.wrong_lang_wer < self.right_lang_wer:
            raise ValueError("wrong_lang_wer must be >= right_lang_wer")
        for name, fid in self.feature_fidelity.items():
            if name == "len":
                raise ValueError(
                    "'len' cannot be fidelity-modeled; it is always the transcript "
                    "character count"
                )
            if not (isinstance(fid, (int, float)) and 0.0 <= fid <= 1.0):
                raise ValueError(f"fidelity for {name!r} must be in [0, 1], got {fid!r}")
        if self.char_languages is not None:
            unknown = sorted(set(self.char_languages) - set(langs))
            if unknown:
                raise ValueError(f"char_languages not in languages: {unknown}")
        for label, count in (
            ("utterances_per_language", self.utterances_per_language),
            ("train_utterances", self.train_utterances),
            ("dev_utterances", self.dev_utterances),
            ("test_utterances", self.test_utterances),
        ):
            if count is None:
                continue
            if not isinstance(count, int) or count < 0:
                raise ValueError(f"{label} must be a non-negative integer, got {count!r}")
        lo, hi = self.ref_len_range
        if not (isinstance(lo, int) and isinstance(hi, int) and 1 <= lo <= hi):
            raise ValueError(f"ref_len_range must be integers 1 <= lo <= hi, got {self.ref_len_range!r}")
        if not isinstance(self.vocab_size, int) or self.vocab_size < 2:
            raise ValueError(f"vocab_size must be an integer >= 2, got {self.vocab_size!r}")

    def resolved_char_languages(self) -> frozenset[str]:
        if self.char_languages is not None:
            return frozenset(self.char_languages)
        return frozenset({self.languages[-1]})

    def split_count(self, split: str) -> int:
        override = {
            "train": self.train_utterances,
            "dev": self.dev_utterances,
            "test": self.test_utterances,
        }[split]
        return self.utterances_per_language if override is None else override


def uniform_confusion(
    languages: Sequence[str], n_best: int, rank1: float, absent: float = 0.0
) -> tuple[tuple[float, ...], ...]:
    """One identical confusion row per language: P(rank 1) = rank1,
    P(absent) = absent, remaining mass uniform over ranks 2..n_best."""
    rest = 1.0 - rank1 - absent
    if rest < -1e-12:
        raise ValueError(f"rank1={rank1} + absent={absent} exceeds 1")
    if n_best == 1:
        if abs(rest) > 1e-9:
            raise ValueError("with n_best=1, rank1 + absent must equal 1")
        row = (rank1, absent)
    else:
        per = max(rest, 0.0) / (n_best - 1)
        row = (rank1, *([per] * (n_best - 1)), absent)
    return tuple(row for _ in languages)


@dataclass(frozen=True)
class _LangVocab:
    language: str
    char_based: bool
    units: tuple[str, ...]  # words for word languages, single chars otherwise
    chars: tuple[str, ...]  # single-character pool for character-level corruption


def _build_vocabs(config: SynthConfig, vocab_seq: np.random.SeedSequence) -> dict[str, _LangVocab]:
    char_set = config.resolved_char_languages()
    word_langs = [l for l in config.languages if l not in char_set]
    syllables = [c + v for c in _CONSONANTS for v in _VOWELS]

    syl_by_lang: dict[str, list[str]] = {}
    for i, lang in enumerate(word_langs):
        syl_by_lang[lang] = syllables[i :: len(word_langs)]

    children = vocab_seq.spawn(len(config.languages))
    vocabs: dict[str, _LangVocab] = {}
    char_block = 0
    for li, lang in enumerate(config.languages):
        if lang in char_set:
            base = _CHAR_BLOCK_START + char_block * _CHAR_BLOCK_SIZE
            char_block += 1
            size = min(config.vocab_size, _CHAR_BLOCK_SIZE)
            units = tuple(chr(base + j) for j in range(size))
            vocabs[lang] = _LangVocab(lang, True, units, units)
        else:
            syls = syl_by_lang[lang]
            s = len(syls)
            total = s * s + s * s * s
            if total < 2:
                raise ValueError(
                    f"language {lang!r} received too few syllables ({s}) to build a "
                    "vocabulary; reduce the language count"
                )
            rng = np.random.default_rng(children[li])
            size = min(config.vocab_size, total)
            picks = np.sort(rng.choice(total, size=size, replace=False))
            words = []
            for idx in picks:
                idx = int(idx)
                if idx < s * s:
                    words.append(syls[idx // s] + syls[idx % s])
                else:
                    idx -= s * s
                    words.append(syls[idx // (s * s)] + syls[(idx // s) % s] + syls[idx % s])
            chars = tuple(sorted({ch for w in words for ch in w}))
            vocabs[lang] = _LangVocab(lang, False, tuple(words), chars)
    return vocabs


def _corruption_pool(vocab: _LangVocab, unit_kind: str) -> tuple[str, ...]:
    """Units the candidate language contributes when corrupting a reference
    whose metric kind is `unit_kind`."""
    if unit_kind == CHARACTER:
        return vocab.chars
    return vocab.units


def _corrupt(
    units: Sequence[str], rate: float, pool: Sequence[str], rng: np.random.Generator
) -> list[str]:
    """Apply substitutions/insertions/deletions at an expected `rate` edits
    per reference unit."""
    p_sub = rate * _SUB_SHARE
    p_del = rate * _DEL_SHARE
    p_ins = rate * _INS_SHARE
    out: list[str] = []
    for unit in units:
        draw = rng.random()
        if draw < p_sub:
            out.append(pool[int(rng.integers(len(pool)))])
        elif draw < p_sub + p_del:
            pass
        else:
            out.append(unit)
        if rng.random() < p_ins:
            out.append(pool[int(rng.integers(len(pool)))])
    return out


def _join(units: Sequence[str], unit_kind: str) -> str:
    return "".join(units) if unit_kind == CHARACTER else " ".join(units)


def _gen_utterance(
    config: SynthConfig,
    vocabs: Mapping[str, _LangVocab],
    ref_lang: str,
    confusion_row: np.ndarray,
    utt_id: str,
    rng: np.random.Generator,
) -> Utterance:
    char_set = config.resolved_char_languages()
    ref_kind = CHARACTER if ref_lang in char_set else WORD
    vocab = vocabs[ref_lang]

    lo, hi = config.ref_len_range
    n_units = int(rng.integers(lo, hi + 1))
    unit_idx = rng.integers(0, len(vocab.units), size=n_units)
    ref_units = [vocab.units[int(i)] for i in unit_idx]
    ref_text = _join(ref_units, ref_kind)

    # Place the true language (confusion row: ranks 1..n_best, then absent).
    slot = int(rng.choice(config.n_best + 1, p=confusion_row))
    true_rank = slot + 1 if slot < config.n_best else None

    others = [l for l in config.languages if l != ref_lang]
    fill = config.n_best - (0 if true_rank is None else 1)
    if fill > 0:
        order = rng.choice(len(others), size=fill, replace=False)
        confusers = [others[int(i)] for i in order]
    else:
        confusers = []

    lang_at_rank: dict[int, str] = {}
    if true_rank is not None:
        lang_at_rank[true_rank] = ref_lang
    free_ranks = [r for r in range(1, config.n_best + 1) if r not in lang_at_rank]
    for rank, lang in zip(free_ranks, confusers):
        lang_at_rank[rank] = lang

    fid_names = sorted(config.feature_fidelity)
    candidates = []
    for rank in range(1, config.n_best + 1):
        cand_lang = lang_at_rank[rank]
        correct = cand_lang == ref_lang
        rate = config.right_lang_wer if correct else config.wrong_lang_wer
        pool = _corruption_pool(vocabs[cand_lang], ref_kind)
        hyp_units = _corrupt(ref_units, rate, pool, rng)
        transcript = _join(hyp_units, ref_kind)
        feats = {}
        for name in fid_names:
            fid = float(config.feature_fidelity[name])
            noise = float(rng.standard_normal())
            feats[name] = (
                FEATURE_BASE
                + FEATURE_MARGIN * fid * (1.0 if correct else 0.0)
                + FEATURE_SIGMA * (1.0 - fid) * noise
            )
        candidates.append(Candidate.build(cand_lang, transcript, rank, feats))

    return Utterance.build(utt_id, ref_lang, ref_text, candidates)


def generate(config: SynthConfig) -> tuple[Corpus, Corpus, Corpus]:
    """Generate (train, dev, test) corpora, deterministically from config.seed.

    Each split and each language gets an independently derived RNG stream,
    so per-language generation order cannot perturb other languages.
    """
    root = np.random.SeedSequence(config.seed)
    vocab_seq, train_seq, dev_seq, test_seq = root.spawn(4)
    vocabs = _build_vocabs(config, vocab_seq)
    char_langs = config.resolved_char_languages()
    rows = [np.asarray(row, dtype=np.float64) for row in config.slid_confusion]
    rows = [row / row.sum() for row in rows]

    corpora = []
    for split, seq in zip(SPLITS, (train_seq, dev_seq, test_seq)):
        count = config.split_count(split)
        lang_seqs = seq.spawn(len(config.languages))
        utterances = []
        for li, lang in enumerate(config.languages):
            rng = np.random.default_rng(lang_seqs[li])
            for k in range(count):
                utterances.append(
                    _gen_utterance(
                        config, vocabs, lang, rows[li], f"{split}-{lang}-{k:05d}", rng
                    )
                )
        corpora.append(
            Corpus(
                utterances=tuple(utterances),
                list_kind=MULTILINGUAL,
                char_languages=char_langs,
                name=f"synth-{split}",
            )
        )
    return corpora[0], corpora[1], corpora[2]


def empirical_confusion(corpus: Corpus) -> dict[str, tuple[float, ...]]:
    """Measured distribution of the reference language's rank per language.

    Returns, per reference language, a tuple of probabilities for ranks
    1..max_nbest followed by the probability the reference language is
    absent from the candidate list.
    """
    if corpus.list_kind != MULTILINGUAL:
        raise ValueError("empirical_confusion requires a multilingual corpus")
    n_max = corpus.max_nbest()
    counts: dict[str, list[int]] = {}
    totals: dict[str, int] = {}
    for utt in corpus.utterances:
        slot = n_max  # absent
        for idx, cand in enumerate(utt.candidates):
            if cand.language == utt.ref_language:
                slot = idx
                break
        row = counts.setdefault(utt.ref_language, [0] * (n_max + 1))
        row[slot] += 1
        totals[utt.ref_language] = totals.get(utt.ref_language, 0) + 1
    return {
        lang: tuple(c / totals[lang] for c in counts[lang]) for lang in sorted(counts)
    }


def derive_monolingual(
    corpus: Corpus, n_best: int, seed: int, *, beam_wer_step: float = 0.08
) -> Corpus:
    """Build a monolingual (beam-search-style) companion corpus.

    Every utterance keeps its id and reference; its candidate list becomes
    n_best variants of the original rank-1 candidate, all in that
    candidate's language: rank 1 is the original hypothesis unchanged, and
    deeper ranks are progressively degraded copies with slightly lower
    feature scores.
    """
    if n_best < 1:
        raise ValueError("n_best must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    utterances = []
    for utt in corpus.utterances:
        base = utt.candidates[0]
        kind = metric_kind_for(base.language, corpus.char_languages)
        units = tokenize(base.transcript, kind)
        base_feats = {n: v for n, v in base.features.items() if n != "len"}
        candidates = [Candidate.build(base.language, base.transcript, 1, dict(base_feats))]
        for rank in range(2, n_best + 1):
            rate = min(0.9, beam_wer_step * (rank - 1))
            variant: list[str] = []
            for unit in units:
                draw = rng.random()
                if draw < 0.5 * rate:
                    continue  # drop the unit
                variant.append(unit)
                if draw >= 0.5 * rate and draw < 0.8 * rate:
                    variant.append(unit)  # stutter
            feats = {
                name: value - 0.25 * (rank - 1) + 0.05 * float(rng.standard_normal())
                for name, value in base_feats.items()
            }
            candidates.append(
                Candidate.build(base.language, _join(variant, kind), rank, feats)
            )
        utterances.append(
            Utterance(utt.id, utt.ref_language, utt.ref_text, tuple(candidates), utt.audio_ref)
        )
    return Corpus(
        utterances=tuple(utterances),
        list_kind=MONOLINGUAL,
        char_languages=corpus.char_languages,
        name=(corpus.name + "-mono") if corpus.name else "mono",
    )


def load_synth_config(path: str | Path) -> SynthConfig:
    """Read a SynthConfig from JSON.

    The confusion matrix is given either in full as "slid_confusion"
    (one row per language, n_best+1 columns) or via the shorthand
    "confusion": {"rank1": p, "absent": q} shared by all languages.
    """
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: synth config must be a JSON object")
    known = {
        "languages",
        "utterances_per_language",
        "n_best",
        "slid_confusion",
        "confusion",
        "right_lang_wer",
        "wrong_lang_wer",
        "feature_fidelity",
        "seed",
        "char_languages",
        "train_utterances",
        "dev_utterances",
        "test_utterances",
        "ref_len_range",
        "vocab_size",
    }
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ValueError(f"{path}: unknown synth-config keys {unknown}")
    required = ["languages", "utterances_per_language", "n_best", "right_lang_wer", "wrong_lang_wer", "feature_fidelity", "seed"]
    missing = [k for k in required if k not in obj]
    if missing:
        raise ValueError(f"{path}: synth config missing keys {missing}")

    languages = tuple(obj["languages"])
    n_best = obj["n_best"]
    if "slid_confusion" in obj and "confusion" in obj:
        raise ValueError(f"{path}: give either 'slid_confusion' or 'confusion', not both")
    if "slid_confusion" in obj:
        confusion = tuple(tuple(float(p) for p in row) for row in obj["slid_confusion"])
    elif "confusion" in obj:
        short = obj["confusion"]
        if not isinstance(short, dict) or "rank1" not in short:
            raise ValueError(f"{path}: 'confusion' shorthand needs at least a 'rank1' key")
        extra = sorted(set(short) - {"rank1", "absent"})
        if extra:
            raise ValueError(f"{path}: unknown 'confusion' keys {extra}")
        confusion = uniform_confusion(
            languages, n_best, float(short["rank1"]), float(short.get("absent", 0.0))
        )
    else:
        raise ValueError(f"{path}: synth config needs 'slid_confusion' or 'confusion'")

    kwargs: dict = {}
    if "char_languages" in obj and obj["char_languages"] is not None:
        kwargs["char_languages"] = tuple(obj["char_languages"])
    for key in ("train_utterances", "dev_utterances", "test_utterances", "vocab_size"):
        if key in obj:
            kwargs[key] = obj[key]
    if "ref_len_range" in obj:
        lo, hi = obj["ref_len_range"]
        kwargs["ref_len_range"] = (lo, hi)

    return SynthConfig(
        languages=languages,
        utterances_per_language=obj["utterances_per_language"],
        n_best=n_best,
        slid_confusion=confusion,
        right_lang_wer=float(obj["right_lang_wer"]),
        wrong_lang_wer=float(obj["wrong_lang_wer"]),
        feature_fidelity=dict(obj["feature_fidelity"]),
        seed=obj["seed"],
        **kwargs,
    )
