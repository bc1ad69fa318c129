"""Seeded random search over weight vectors and its fast evaluation path."""

from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from lidrerank import (
    MACRO,
    MICRO,
    OBJECTIVE_MACRO,
    OBJECTIVE_MICRO,
    Corpus,
    EvalTable,
    TunerConfig,
    default_search_space,
    evaluate_weights,
    load_tuner_config,
    score_selection,
    select_baseline,
    select_oracle,
    select_rerank,
    tune,
    validate_search_space,
    write_trial_log,
    write_tuner_result,
)

from conftest import corpora, gold_corpus, make_utterance, random_corpus, small_tuner_config


# ---------------------------------------------------------------------------
# search space


def test_default_ranges_per_documented_feature():
    assert default_search_space({"slid"}) == {"slid": (0.0, 100.0)}
    assert default_search_space({"wlid"}) == {"wlid": (0.0, 100.0)}
    assert default_search_space({"len"}) == {"len": (-5.0, 5.0)}
    assert default_search_space({"myfeat"}) == {"myfeat": (0.0, 10.0)}
    assert default_search_space({"lm", "asr", "uasr"}) == {
        "lm": (0.0, 10.0),
        "asr": (0.0, 10.0),
        "uasr": (0.0, 10.0),
    }


def test_validate_search_space_rejects_bad_entries():
    with pytest.raises(ValueError):
        validate_search_space({"slid": (3.0, 1.0)})  # inverted
    with pytest.raises(ValueError):
        validate_search_space({"slid": (0.0, math.inf)})
    with pytest.raises(ValueError):
        validate_search_space({"slid": (0.0,)})
    with pytest.raises(ValueError):
        validate_search_space({"": (0.0, 1.0)})
    assert validate_search_space({"x": [1, 2]}) == {"x": (1.0, 2.0)}
    assert validate_search_space({"x": (2.0, 2.0)}) == {"x": (2.0, 2.0)}  # point interval


def test_tuner_config_validation():
    space = {"slid": (0.0, 1.0)}
    with pytest.raises(ValueError):
        TunerConfig(space=space, iterations=0)
    with pytest.raises(ValueError):
        TunerConfig(space=space, objective="wer")
    assert TunerConfig(space=space).aggregation == MACRO
    assert TunerConfig(space=space, objective=OBJECTIVE_MICRO).aggregation == MICRO
    assert TunerConfig(space=space).iterations == 10000


# ---------------------------------------------------------------------------
# tune: determinism, anchors, bounds


def test_identical_config_gives_identical_result():
    corpus = random_corpus(11)
    config = small_tuner_config(corpus.feature_names(), iterations=40, seed=123)
    a = tune(corpus, config)
    b = tune(corpus, config)
    assert a == b


def test_single_iteration_runs():
    corpus = random_corpus(12)
    config = small_tuner_config(corpus.feature_names(), iterations=1)
    result = tune(corpus, config)
    assert result.iterations == 1
    assert len(result.trials) == 1 + result.anchor_count


def test_job_count_does_not_change_results():
    corpus = random_corpus(13, n_utterances=30)
    config = small_tuner_config(corpus.feature_names(), iterations=200, seed=5)
    serial = tune(corpus, config, jobs=1)
    parallel = tune(corpus, config, jobs=8)
    assert serial == parallel


def test_different_seeds_sample_different_weights():
    corpus = random_corpus(14)
    names = corpus.feature_names()
    a = tune(corpus, small_tuner_config(names, iterations=5, seed=1))
    b = tune(corpus, small_tuner_config(names, iterations=5, seed=2))
    assert [t.weights for t in a.trials[a.anchor_count:]] != [
        t.weights for t in b.trials[b.anchor_count:]
    ]


@given(corpora(), st.integers(min_value=0, max_value=2**31))
@settings(max_examples=15)
def test_anchor_guarantee_never_worse_than_baseline(corpus, seed):
    config = small_tuner_config(corpus.feature_names(), iterations=8, seed=seed)
    result = tune(corpus, config)
    baseline = score_selection(corpus, select_baseline(corpus), MACRO).overall_error_rate
    zero = evaluate_weights(corpus, {}, MACRO)
    assert baseline == zero  # all-zero weights reproduce the baseline via the tie rule
    assert result.best_objective <= baseline


def test_anchor_rows_come_first_and_are_flagged():
    corpus = random_corpus(15)
    config = small_tuner_config(corpus.feature_names(), iterations=10)
    result = tune(corpus, config)
    assert result.anchor_count == 2  # all-zero + slid-only
    assert [t.is_anchor for t in result.trials[:2]] == [True, True]
    assert not any(t.is_anchor for t in result.trials[2:])
    assert result.trials[0].weights == {n: 0.0 for n in result.feature_names}
    slid_only = result.trials[1].weights
    assert slid_only["slid"] == 1.0
    assert all(v == 0.0 for n, v in slid_only.items() if n != "slid")
    assert len(result.trials) == 10 + 2


def test_slid_anchor_uses_midpoint_when_one_is_out_of_range():
    corpus = random_corpus(16)
    config = TunerConfig(space={"slid": (40.0, 60.0), "asr": (0.0, 10.0)}, iterations=4)
    result = tune(corpus, config)
    assert result.trials[1].weights["slid"] == 50.0


def test_no_slid_in_space_gives_single_anchor():
    corpus = random_corpus(17)
    config = TunerConfig(space={"asr": (0.0, 10.0), "lm": (0.0, 10.0)}, iterations=4)
    result = tune(corpus, config)
    assert result.anchor_count == 1
    assert result.trials[0].weights == {"asr": 0.0, "lm": 0.0}


def test_anchors_can_be_disabled():
    corpus = random_corpus(18)
    config = small_tuner_config(corpus.feature_names(), iterations=6, include_anchors=False)
    result = tune(corpus, config)
    assert result.anchor_count == 0
    assert len(result.trials) == 6
    assert not any(t.is_anchor for t in result.trials)


def test_extra_anchors_are_appended_after_builtins():
    corpus = random_corpus(19)
    names = corpus.feature_names()
    warm = {"slid": 42.0, "asr": 3.0}
    config = small_tuner_config(names, iterations=5)
    result = tune(corpus, config, extra_anchors=[warm])
    assert result.anchor_count == 3
    filled = {n: warm.get(n, 0.0) for n in result.feature_names}
    assert result.trials[2].weights == filled
    assert result.trials[2].is_anchor


def test_extra_anchor_outside_space_is_rejected():
    corpus = random_corpus(20)
    config = small_tuner_config(corpus.feature_names(), iterations=2)
    with pytest.raises(ValueError, match="outside the search space"):
        tune(corpus, config, extra_anchors=[{"nosuch": 1.0}])


def test_sampled_weights_stay_in_bounds():
    corpus = random_corpus(21)
    space = {"slid": (5.0, 7.0), "asr": (-2.0, -1.0), "len": (0.0, 0.0)}
    result = tune(corpus, TunerConfig(space=space, iterations=300))
    for trial in result.trials[result.anchor_count:]:
        for name, (lo, hi) in space.items():
            assert lo <= trial.weights[name] <= hi
        assert trial.weights["len"] == 0.0  # degenerate interval samples its endpoint


def test_empty_dev_or_space_rejected():
    corpus = random_corpus(22)
    with pytest.raises(ValueError, match="empty"):
        tune(Corpus(utterances=()), small_tuner_config(("slid",), iterations=2))
    with pytest.raises(ValueError, match="empty"):
        tune(corpus, TunerConfig(space={}, iterations=2))


def test_all_nan_objective_is_an_error():
    # every reference empty but hypotheses non-empty: rate undefined everywhere
    utts = tuple(
        make_utterance(f"u{i}", "aaa" if i % 2 else "bbb", "", [("aaa" if i % 2 else "bbb", "spur ious", {"slid": -1.0})])
        for i in range(4)
    )
    corpus = Corpus(utterances=utts, name="undefined")
    with pytest.raises(ValueError, match="undefined"):
        tune(corpus, small_tuner_config(("slid",), iterations=3))


# ---------------------------------------------------------------------------
# result invariants


def test_best_is_minimum_and_earliest():
    corpus = random_corpus(23, n_utterances=25)
    config = small_tuner_config(corpus.feature_names(), iterations=150, seed=9)
    result = tune(corpus, config)
    objectives = [t.objective for t in result.trials]
    finite = [o for o in objectives if not math.isnan(o)]
    assert result.best_objective == min(finite)
    assert objectives.index(result.best_objective) == result.best_index


def test_constant_objective_tie_resolves_to_first_trial():
    utts = tuple(
        make_utterance(f"u{i}", "aaa", "ka no", [("aaa", "ka no", {"slid": -1.0}), ("bbb", "ka no", {"slid": -2.0})])
        for i in range(3)
    )
    corpus = Corpus(utterances=utts, name="flat")
    config = small_tuner_config(("slid",), iterations=20)
    result = tune(corpus, config)
    assert result.best_index == 0
    assert result.best_objective == 0.0
    no_anchors = tune(corpus, small_tuner_config(("slid",), iterations=20, include_anchors=False))
    assert no_anchors.best_index == 0


def test_best_weights_reproduce_best_objective_exactly():
    corpus = random_corpus(24, n_utterances=40)
    for objective in (OBJECTIVE_MACRO, OBJECTIVE_MICRO):
        config = small_tuner_config(corpus.feature_names(), iterations=120, objective=objective)
        result = tune(corpus, config)
        replayed = evaluate_weights(corpus, result.best_weights, result.aggregation)
        assert replayed == result.best_objective  # bit-exact, not approx


def test_running_minimum_is_non_increasing():
    corpus = random_corpus(25)
    result = tune(corpus, small_tuner_config(corpus.feature_names(), iterations=80))
    best = math.inf
    for trial in result.trials:
        if not math.isnan(trial.objective):
            best = min(best, trial.objective)
        assert result.best_objective <= best or math.isinf(best)
    assert best == result.best_objective


def test_tuner_finds_planted_gold_signal():
    corpus = gold_corpus(31, n_utterances=60)
    config = TunerConfig(
        space=default_search_space(("gold", "asr", "lm")), iterations=800, seed=3
    )
    result = tune(corpus, config)
    chosen = select_rerank(corpus, result.best_weights)
    oracle = select_oracle(corpus)
    agree = sum(chosen[u.id] == oracle[u.id] for u in corpus.utterances) / len(corpus)
    assert agree >= 0.95
    assert result.best_weights["gold"] > 0.0


def test_full_search_aligns_gold_selection_with_oracle():
    # Full-size search at the default iteration budget: the best weights must
    # pick the planted always-correct candidate on >= 99% of dev utterances.
    corpus = gold_corpus(33, n_utterances=100)
    config = TunerConfig(
        space=default_search_space(("gold", "asr", "lm")), iterations=10000, seed=3
    )
    result = tune(corpus, config, jobs=4)
    chosen = select_rerank(corpus, result.best_weights)
    oracle = select_oracle(corpus)
    agree = sum(chosen[u.id] == oracle[u.id] for u in corpus.utterances) / len(corpus)
    assert agree >= 0.99


def test_dominant_gold_weight_matches_oracle_error_rate():
    corpus = gold_corpus(32, n_utterances=50)
    weights = {"gold": 10.0, "asr": 0.1, "lm": 0.1}
    rate = evaluate_weights(corpus, weights, MACRO)
    oracle_rate = score_selection(corpus, select_oracle(corpus), MACRO).overall_error_rate
    assert rate == oracle_rate == 0.0


# ---------------------------------------------------------------------------
# EvalTable: the vectorized path must match the scalar path bit for bit


@given(corpora(), st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30)
def test_table_agrees_with_scalar_selection_and_objective(corpus, wseed):
    names = corpus.feature_names()
    rng = np.random.default_rng(wseed)
    table = EvalTable(corpus, names, MACRO)
    row = rng.uniform(-5.0, 5.0, size=len(table.names))
    weights = {n: float(v) for n, v in zip(table.names, row)}

    fast_sel = table.select(row)
    slow_sel = select_rerank(corpus, weights)
    for i, uid in enumerate(table.utterance_ids):
        assert fast_sel[i] == slow_sel[uid]

    report = score_selection(corpus, slow_sel, MACRO)
    fast_obj = table.objective(row)
    if math.isnan(report.overall_error_rate):
        assert math.isnan(fast_obj)
    else:
        assert fast_obj == report.overall_error_rate
    assert table.slid_accuracy(row) == report.slid_accuracy

    micro_table = EvalTable(corpus, names, MICRO)
    micro_obj = micro_table.objective(row)
    assert micro_obj == evaluate_weights(corpus, weights, MICRO)


def test_table_rejects_empty_corpus_and_bad_aggregation():
    with pytest.raises(ValueError):
        EvalTable(Corpus(utterances=()), ("slid",), MACRO)
    with pytest.raises(ValueError):
        EvalTable(random_corpus(26), ("slid",), "median")


def test_evaluate_weights_zero_equals_baseline_rate():
    corpus = random_corpus(27)
    baseline_rate = score_selection(corpus, select_baseline(corpus), MACRO).overall_error_rate
    assert evaluate_weights(corpus, {}, MACRO) == baseline_rate
    assert evaluate_weights(corpus, {n: 0.0 for n in corpus.feature_names()}, MACRO) == baseline_rate


# ---------------------------------------------------------------------------
# config and result files


def test_load_tuner_config_full(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(
        json.dumps(
            {
                "space": {"slid": [0, 50], "asr": [0, 5]},
                "iterations": 77,
                "seed": 4,
                "objective": "error_rate_micro",
                "include_anchors": False,
            }
        ),
        encoding="utf-8",
    )
    config = load_tuner_config(path)
    assert config.space == {"slid": (0.0, 50.0), "asr": (0.0, 5.0)}
    assert config.iterations == 77
    assert config.seed == 4
    assert config.objective == OBJECTIVE_MICRO
    assert config.include_anchors is False


def test_load_tuner_config_accepts_shorthand_objective(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"space": {"slid": [0, 1]}, "objective": "micro"}), encoding="utf-8")
    assert load_tuner_config(path).objective == OBJECTIVE_MICRO
    path.write_text(json.dumps({"space": {"slid": [0, 1]}, "objective": "macro"}), encoding="utf-8")
    assert load_tuner_config(path).objective == OBJECTIVE_MACRO


def test_load_tuner_config_defaults_space_from_feature_names(tmp_path):
    path = tmp_path / "t.json"
    path.write_text("{}", encoding="utf-8")
    config = load_tuner_config(path, feature_names=("slid", "len"))
    assert config.space == {"slid": (0.0, 100.0), "len": (-5.0, 5.0)}
    assert config.iterations == 10000
    with pytest.raises(ValueError, match="space"):
        load_tuner_config(path)


def test_load_tuner_config_rejects_unknown_keys_and_bad_types(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"space": {"slid": [0, 1]}, "trials": 5}), encoding="utf-8")
    with pytest.raises(ValueError, match="trials"):
        load_tuner_config(path)
    path.write_text(json.dumps({"space": {"slid": [0, 1]}, "seed": "abc"}), encoding="utf-8")
    with pytest.raises(ValueError, match="seed"):
        load_tuner_config(path)
    path.write_text(json.dumps({"space": {"slid": [0, 1]}, "include_anchors": 1}), encoding="utf-8")
    with pytest.raises(ValueError, match="include_anchors"):
        load_tuner_config(path)


def test_tuner_result_file_contents(tmp_path):
    corpus = random_corpus(28)
    config = small_tuner_config(corpus.feature_names(), iterations=12, seed=6)
    result = tune(corpus, config)
    path = tmp_path / "result.json"
    write_tuner_result(result, path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["best_weights"] == result.best_weights
    assert data["best_objective"] == result.best_objective
    assert data["seed"] == 6
    assert data["iterations"] == 12
    assert data["trial_count"] == len(result.trials)
    assert data["feature_names"] == list(result.feature_names)


def test_trial_log_csv(tmp_path):
    corpus = random_corpus(29)
    result = tune(corpus, small_tuner_config(corpus.feature_names(), iterations=7))
    path = tmp_path / "trials.csv"
    write_trial_log(result, path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["trial", *result.feature_names, "objective"]
    assert len(rows) == 1 + len(result.trials)
    assert [int(r[0]) for r in rows[1:]] == list(range(len(result.trials)))
    first = result.trials[3]
    assert [float(x) for x in rows[4][1:-1]] == [first.weights[n] for n in result.feature_names]
