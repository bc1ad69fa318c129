"""Linear scoring and the rerank/baseline/oracle selection policies."""

from __future__ import annotations

import json
import math

import pytest
from hypothesis import given
import hypothesis.strategies as st

from lidrerank import (
    BASELINE,
    ORACLE,
    RERANK,
    Corpus,
    Selection,
    combined_score,
    load_selection,
    load_weights,
    save_selection,
    save_weights,
    score_selection,
    select_baseline,
    select_oracle,
    select_rerank,
    truncate_nbest,
    validate_weights,
)

from conftest import corpora, make_candidate, make_utterance, random_corpus


# ---------------------------------------------------------------------------
# validate_weights / combined_score


def test_validate_weights_accepts_ints_and_floats():
    out = validate_weights({"slid": 10, "lm": 1.5})
    assert out == {"slid": 10.0, "lm": 1.5}
    assert all(isinstance(v, float) for v in out.values())


def test_validate_weights_rejects_bad_values():
    for bad in (math.nan, math.inf, "3", True, None):
        with pytest.raises(ValueError):
            validate_weights({"slid": bad})
    with pytest.raises(ValueError):
        validate_weights({"": 1.0})
    with pytest.raises(ValueError):
        validate_weights({3: 1.0})


def test_combined_score_arithmetic():
    cand = make_candidate("eng", "x", 1, slid=-1.0, lm=-2.0)
    assert combined_score(cand, {"slid": 10.0, "lm": 1.0}) == -12.0


def test_combined_score_zero_weights():
    cand = make_candidate("eng", "x", 1, slid=-1.0, lm=-2.0, asr=-3.0)
    assert combined_score(cand, {}) == 0.0
    assert combined_score(cand, {"slid": 0.0, "lm": 0.0}) == 0.0


def test_combined_score_missing_feature_contributes_zero():
    cand = make_candidate("eng", "x", 1, slid=-1.0)
    assert combined_score(cand, {"asr": 2.0}) == 0.0
    assert combined_score(cand, {"asr": 2.0, "slid": 1.0}) == -1.0


@given(
    st.dictionaries(
        st.sampled_from(["slid", "asr", "lm", "wlid", "uasr"]),
        st.floats(-50, 50),
        min_size=1,
    ),
    st.dictionaries(
        st.sampled_from(["slid", "asr", "lm", "wlid", "uasr", "len"]),
        st.floats(-50, 50),
    ),
)
def test_combined_score_matches_sorted_order_accumulation(feats, weights):
    cand = make_candidate("eng", "hello", 1, **feats)
    expected = 0.0
    for name in sorted(weights):
        expected += weights[name] * cand.features.get(name, 0.0)
    assert combined_score(cand, weights) == expected


# ---------------------------------------------------------------------------
# select_rerank


def test_rank_order_preserving_feature_reproduces_baseline():
    corpus = random_corpus(5, n_languages=4, n_utterances=12)
    # overwrite slid with strictly decreasing values in rank
    utts = []
    for utt in corpus.utterances:
        specs = [
            (c.language, c.transcript, {**c.features, "slid": -float(i)})
            for i, c in enumerate(utt.candidates)
        ]
        utts.append(make_utterance(utt.id, utt.ref_language, utt.ref_text, specs))
    corpus = Corpus(utterances=tuple(utts), name="ordered")
    rerank = select_rerank(corpus, {"slid": 1.0})
    baseline = select_baseline(corpus)
    assert dict(rerank.choices) == dict(baseline.choices)


def test_tied_scores_choose_lower_slid_rank():
    utt = make_utterance(
        "u1", "deu", "r",
        [("eng", "a", {"slid": -1.0}), ("deu", "b", {"slid": -1.0})],
    )
    corpus = Corpus(utterances=(utt,), name="tie")
    assert select_rerank(corpus, {"slid": 5.0})["u1"] == 0


def test_argmax_picks_highest_weighted_feature():
    utt = make_utterance(
        "u1", "deu", "r",
        [
            ("eng", "a", {"wlid": -5.0}),
            ("deu", "b", {"wlid": -1.0}),
            ("nld", "c", {"wlid": -3.0}),
        ],
    )
    corpus = Corpus(utterances=(utt,), name="argmax")
    assert select_rerank(corpus, {"wlid": 1.0})["u1"] == 1


def test_zero_weights_degenerate_to_baseline(demo_corpus):
    rerank = select_rerank(demo_corpus, {"slid": 0.0, "asr": 0.0})
    assert dict(rerank.choices) == dict(select_baseline(demo_corpus).choices)


def test_negative_weight_flips_preference():
    utt = make_utterance(
        "u1", "deu", "r",
        [("eng", "a", {"asr": -1.0}), ("deu", "b", {"asr": -9.0})],
    )
    corpus = Corpus(utterances=(utt,), name="neg")
    assert select_rerank(corpus, {"asr": 1.0})["u1"] == 0
    assert select_rerank(corpus, {"asr": -1.0})["u1"] == 1


def test_weighting_unknown_feature_warns_and_scores_zero(demo_corpus):
    with pytest.warns(UserWarning, match="uasr"):
        sel = select_rerank(demo_corpus, {"uasr": 3.0})
    assert dict(sel.choices) == dict(select_baseline(demo_corpus).choices)


def test_no_warning_when_weighted_features_exist(demo_corpus):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        select_rerank(demo_corpus, {"slid": 1.0, "uasr": 0.0})


@given(corpora(), st.sampled_from([0.001953125, 0.5, 2.0, 8.0, 1024.0]))
def test_scale_invariance_under_power_of_two_factors(corpus, factor):
    """Powers of two rescale every float product and sum exactly, so the
    argmax and tie pattern are provably unchanged."""
    weights = {"slid": 3.0, "asr": 1.25, "lm": -0.75}
    base = select_rerank(corpus, weights)
    scaled = select_rerank(corpus, {k: v * factor for k, v in weights.items()})
    assert dict(base.choices) == dict(scaled.choices)


def test_scale_invariance_on_generic_positive_factor():
    corpus = random_corpus(99, n_languages=5, n_utterances=60)
    weights = {"slid": 2.0, "asr": 0.7, "wlid": 1.3}
    base = select_rerank(corpus, weights)
    for factor in (3.7, 0.013, 251.0):
        scaled = select_rerank(corpus, {k: v * factor for k, v in weights.items()})
        assert dict(base.choices) == dict(scaled.choices)


def test_selection_metadata():
    corpus = random_corpus(3)
    weights = {"slid": 1.0}
    sel = select_rerank(corpus, weights)
    assert sel.policy == RERANK
    assert sel.weights == weights
    assert len(sel) == len(corpus)
    assert select_baseline(corpus).policy == BASELINE
    assert select_baseline(corpus).weights is None
    assert select_oracle(corpus).policy == ORACLE


def test_unknown_policy_rejected():
    with pytest.raises(ValueError):
        Selection(choices={}, policy="best-effort")


# ---------------------------------------------------------------------------
# select_baseline / select_oracle


@given(corpora())
def test_baseline_always_picks_rank_one(corpus):
    sel = select_baseline(corpus)
    for utt in corpus.utterances:
        assert utt.candidates[sel[utt.id]].slid_rank == 1


def test_oracle_picks_reference_language_wherever_it_ranks():
    utt = make_utterance(
        "u1", "deu", "r",
        [
            ("eng", "a", {"slid": -0.1}),
            ("nld", "b", {"slid": -0.2}),
            ("fra", "c", {"slid": -0.3}),
            ("deu", "d", {"slid": -9.0}),
        ],
    )
    corpus = Corpus(utterances=(utt,), name="deep")
    assert select_oracle(corpus)["u1"] == 3


def test_oracle_falls_back_to_highest_slid_when_absent():
    utt = make_utterance(
        "u1", "xho", "r",
        [
            ("eng", "a", {"slid": -1.2}),
            ("deu", "b", {"slid": -0.3}),
            ("fra", "c", {"slid": -4.0}),
        ],
    )
    corpus = Corpus(utterances=(utt,), name="absent")
    assert select_oracle(corpus)["u1"] == 1


def test_oracle_equals_baseline_when_reference_ranks_first():
    utt = make_utterance(
        "u1", "eng", "r",
        [("eng", "a", {"slid": -0.1}), ("deu", "b", {"slid": -0.5})],
    )
    corpus = Corpus(utterances=(utt,), name="rank1")
    assert select_oracle(corpus)["u1"] == select_baseline(corpus)["u1"] == 0


def test_oracle_monolingual_duplicates_choose_lowest_rank():
    from lidrerank import MONOLINGUAL

    utt = make_utterance(
        "u1", "eng", "r",
        [("eng", "a", {}), ("eng", "b", {}), ("eng", "c", {})],
    )
    corpus = Corpus(utterances=(utt,), list_kind=MONOLINGUAL, name="mono")
    assert select_oracle(corpus)["u1"] == 0


def test_oracle_absent_without_slid_features_ties_to_rank_one():
    utt = make_utterance(
        "u1", "xho", "r",
        [("eng", "a", {"asr": -2.0}), ("deu", "b", {"asr": -1.0})],
    )
    corpus = Corpus(utterances=(utt,), name="no-slid")
    assert select_oracle(corpus)["u1"] == 0


def test_oracle_absent_partial_slid_prefers_scored_candidate():
    utt = make_utterance(
        "u1", "xho", "r",
        [("eng", "a", {}), ("deu", "b", {"slid": -50.0})],
    )
    corpus = Corpus(utterances=(utt,), name="partial-slid")
    assert select_oracle(corpus)["u1"] == 1  # any finite slid beats an absent one


@given(corpora())
def test_oracle_slid_dominance_and_exact_accuracy(corpus):
    oracle_report = score_selection(corpus, select_oracle(corpus))
    containing = sum(
        any(c.language == u.ref_language for c in u.candidates) for u in corpus.utterances
    )
    assert oracle_report.slid_accuracy == pytest.approx(containing / len(corpus))
    for sel in (
        select_baseline(corpus),
        select_rerank(corpus, {"slid": 2.0, "asr": 1.0}),
        select_rerank(corpus, {"lm": -1.0}),
    ):
        assert oracle_report.slid_accuracy >= score_selection(corpus, sel).slid_accuracy


@given(corpora())
def test_oracle_slid_accuracy_monotone_in_n(corpus):
    accs = []
    for n in range(1, corpus.max_nbest() + 1):
        t = truncate_nbest(corpus, n)
        accs.append(score_selection(t, select_oracle(t)).slid_accuracy)
    assert all(a <= b + 1e-12 for a, b in zip(accs, accs[1:]))


@given(corpora())
def test_policies_collapse_on_single_candidate_lists(corpus):
    t = truncate_nbest(corpus, 1)
    baseline = dict(select_baseline(t).choices)
    assert dict(select_rerank(t, {"slid": 7.0, "asr": -2.0}).choices) == baseline
    assert dict(select_oracle(t).choices) == baseline


def test_selection_is_deterministic():
    corpus = random_corpus(41)
    w = {"slid": 1.5, "asr": 0.5}
    assert dict(select_rerank(corpus, w).choices) == dict(select_rerank(corpus, w).choices)
    assert dict(select_oracle(corpus).choices) == dict(select_oracle(corpus).choices)


# ---------------------------------------------------------------------------
# weights and selection files


def test_weight_file_round_trip(tmp_path):
    path = tmp_path / "w.json"
    weights = {"slid": 31.5, "asr": 2.0, "len": -0.25}
    save_weights(weights, path)
    obj = json.loads(path.read_text(encoding="utf-8"))
    assert set(obj) == {"weights"}
    assert obj["weights"] == weights
    assert load_weights(path) == weights


def test_load_weights_rejects_wrong_shape(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"w": {}}), encoding="utf-8")
    with pytest.raises(ValueError):
        load_weights(path)
    path.write_text(json.dumps({"weights": {"slid": "high"}}), encoding="utf-8")
    with pytest.raises(ValueError):
        load_weights(path)


def test_selection_file_rows_carry_chosen_candidate(tmp_path, demo_corpus):
    sel = select_oracle(demo_corpus)
    path = tmp_path / "sel.jsonl"
    save_selection(sel, demo_corpus, path)
    rows = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
    assert [set(r) for r in rows] == [{"id", "index", "language", "transcript"}] * 3
    by_id = {r["id"]: r for r in rows}
    assert by_id["u1"]["index"] == 1
    assert by_id["u1"]["language"] == "deu"
    assert by_id["u1"]["transcript"] == "die katze sass"
    assert load_selection(path) == dict(sel.choices)


def test_selection_round_trip_preserves_scores(tmp_path):
    corpus = random_corpus(77)
    sel = select_rerank(corpus, {"slid": 10.0, "asr": 1.0})
    path = tmp_path / "sel.jsonl"
    save_selection(sel, corpus, path)
    loaded = load_selection(path)
    assert score_selection(corpus, loaded) == score_selection(corpus, sel)


def test_load_selection_rejects_duplicates_and_bad_rows(tmp_path):
    path = tmp_path / "dup.jsonl"
    row = json.dumps({"id": "u1", "index": 0, "language": "eng", "transcript": "x"})
    path.write_text(row + "\n" + row + "\n", encoding="utf-8")
    with pytest.raises(ValueError, match="duplicate"):
        load_selection(path)

    path.write_text('{"id": "u1"}\n', encoding="utf-8")
    with pytest.raises(ValueError, match="index"):
        load_selection(path)

    path.write_text("not json\n", encoding="utf-8")
    with pytest.raises(ValueError, match=r"dup\.jsonl:1"):
        load_selection(path)

    path.write_text(json.dumps({"id": "u1", "index": -2}) + "\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_selection(path)

    path.write_text(json.dumps({"id": "u1", "index": True}) + "\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_selection(path)
