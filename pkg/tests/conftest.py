"""Shared test builders and hypothesis configuration."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
import hypothesis.strategies as st

from lidrerank import MULTILINGUAL, Candidate, Corpus, TunerConfig, Utterance, default_search_space

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_WORDS = ("ka", "no", "ti", "ra", "su", "me", "lo", "vi", "pa", "du")


def make_candidate(language: str, transcript: str, rank: int, **features) -> Candidate:
    return Candidate.build(language, transcript, rank, features)


def make_utterance(uid: str, ref_language: str, ref_text: str, specs) -> Utterance:
    """specs: iterable of (language, transcript, features-dict) in rank order."""
    cands = [
        Candidate.build(lang, text, rank, dict(feats))
        for rank, (lang, text, feats) in enumerate(specs, start=1)
    ]
    return Utterance.build(uid, ref_language, ref_text, cands)


def random_corpus(
    seed: int,
    *,
    n_languages: int | None = None,
    n_utterances: int | None = None,
    n_best: int | None = None,
    feature_names: tuple[str, ...] = ("slid", "asr", "lm", "wlid"),
    ref_present_prob: float = 0.8,
    include_char_language: bool = True,
) -> Corpus:
    """Seeded random multilingual corpus for property tests.

    Feature values are standard-normal draws; the reference language appears
    somewhere in the candidate list with probability ref_present_prob.
    """
    rng = np.random.default_rng(seed)
    n_lang = n_languages if n_languages is not None else int(rng.integers(3, 9))
    langs = [f"zx{i:02d}" for i in range(n_lang)]
    char_langs = frozenset({langs[-1]}) if include_char_language and rng.random() < 0.5 else frozenset()
    nb = n_best if n_best is not None else int(rng.integers(2, min(5, n_lang) + 1))
    if nb > n_lang:
        raise ValueError("n_best cannot exceed n_languages for multilingual lists")
    n_utt = n_utterances if n_utterances is not None else int(rng.integers(4, 21))

    def words(k: int) -> str:
        return " ".join(_WORDS[int(i)] for i in rng.integers(0, len(_WORDS), size=k))

    utterances = []
    for u in range(n_utt):
        ref = langs[int(rng.integers(n_lang))]
        ref_text = words(int(rng.integers(1, 7)))
        others = [l for l in langs if l != ref]
        # an absent reference needs nb distinct non-ref languages
        present = rng.random() < ref_present_prob or nb > len(others)
        if present:
            idx = rng.choice(len(others), size=nb - 1, replace=False)
            cand_langs = [others[int(i)] for i in idx]
            cand_langs.insert(int(rng.integers(nb)), ref)
        else:
            idx = rng.choice(len(others), size=nb, replace=False)
            cand_langs = [others[int(i)] for i in idx]
        specs = []
        for lang in cand_langs:
            transcript = words(int(rng.integers(0, 7)))
            feats = {name: float(rng.standard_normal()) for name in feature_names}
            specs.append((lang, transcript, feats))
        utterances.append(make_utterance(f"u{u:04d}", ref, ref_text, specs))
    return Corpus(
        utterances=tuple(utterances),
        list_kind=MULTILINGUAL,
        char_languages=char_langs,
        name=f"rand-{seed}",
    )


def gold_corpus(
    seed: int,
    *,
    n_languages: int = 6,
    n_utterances: int = 80,
    n_best: int = 4,
) -> Corpus:
    """Corpus with a planted signal: feature "gold" is 1.0 exactly on the
    reference-language candidate (whose transcript matches the reference) and
    0.0 elsewhere; the other features are uniform noise in [-1, 0].
    """
    rng = np.random.default_rng(seed)
    langs = [f"gl{i:02d}" for i in range(n_languages)]

    def words(k: int) -> str:
        return " ".join(_WORDS[int(i)] for i in rng.integers(0, len(_WORDS), size=k))

    utterances = []
    for u in range(n_utterances):
        ref = langs[int(rng.integers(n_languages))]
        ref_text = words(int(rng.integers(2, 6)))
        others = [l for l in langs if l != ref]
        idx = rng.choice(len(others), size=n_best - 1, replace=False)
        cand_langs = [others[int(i)] for i in idx]
        cand_langs.insert(int(rng.integers(n_best)), ref)
        specs = []
        for lang in cand_langs:
            is_ref = lang == ref
            feats = {
                "gold": 1.0 if is_ref else 0.0,
                "asr": float(-rng.random()),
                "lm": float(-rng.random()),
            }
            specs.append((lang, ref_text if is_ref else words(int(rng.integers(1, 6))), feats))
        utterances.append(make_utterance(f"g{u:04d}", ref, ref_text, specs))
    return Corpus(utterances=tuple(utterances), list_kind=MULTILINGUAL, name=f"gold-{seed}")


def small_tuner_config(feature_names, iterations: int = 50, seed: int = 0, **kwargs) -> TunerConfig:
    return TunerConfig(
        space=default_search_space(feature_names), iterations=iterations, seed=seed, **kwargs
    )


@st.composite
def corpora(draw, **builder_kwargs):
    """Hypothesis strategy over random corpora (shrinks over the seed)."""
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_corpus(seed, **builder_kwargs)


@pytest.fixture
def demo_corpus() -> Corpus:
    """Small fixed corpus with known structure for exact-value tests.

    u1: ref deu present at rank 2; u2: ref cmn (character metric) present at
    rank 1; u3: ref fra absent from the list.
    """
    u1 = make_utterance(
        "u1",
        "deu",
        "die katze sass",
        [
            ("eng", "the cat sat", {"slid": -0.5, "asr": -2.0, "lm": -1.0}),
            ("deu", "die katze sass", {"slid": -1.0, "asr": -1.5, "lm": -0.5}),
            ("nld", "de kat zat", {"slid": -2.0, "asr": -3.0, "lm": -2.5}),
        ],
    )
    u2 = make_utterance(
        "u2",
        "cmn",
        "你好世界",
        [
            ("cmn", "你好世界", {"slid": -0.2, "asr": -1.0, "lm": -0.7}),
            ("jpn", "こんにちは", {"slid": -1.1, "asr": -2.2, "lm": -1.9}),
        ],
    )
    u3 = make_utterance(
        "u3",
        "fra",
        "le chat",
        [
            ("spa", "el gato", {"slid": -0.9, "asr": -1.2, "lm": -1.4}),
            ("ita", "il gatto", {"slid": -0.4, "asr": -1.6, "lm": -1.1}),
        ],
    )
    return Corpus(utterances=(u1, u2, u3), name="demo")
