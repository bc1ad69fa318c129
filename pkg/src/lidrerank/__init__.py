"""Multilingual N-best re-ranking for language-ID-conditioned speech recognition.

The library scores (language, transcript) candidates with a weighted linear
combination of named features, tunes the weights by seeded random search
against dev-set error rate, and evaluates language-ID accuracy and
word/character error rate against baseline and oracle selection policies.
"""

__version__ = "0.1.0"

from .analysis import (
    AblationStep,
    CompareReport,
    CompareRow,
    SubsetBreakdown,
    SweepPoint,
    TailReport,
    TailRow,
    ablate_features,
    compare_list_kinds,
    format_sweep_text,
    format_table,
    format_tail_text,
    subset_breakdown,
    sweep_n,
    tail_report,
    write_ablation_csv,
    write_breakdown_csv,
    write_compare_csv,
    write_json,
    write_sweep_csv,
    write_tail_csv,
)
from .corpus import (
    CANONICAL_FEATURES,
    DEFAULT_CHAR_LANGUAGES,
    LIST_KINDS,
    MONOLINGUAL,
    MULTILINGUAL,
    Candidate,
    Corpus,
    CorpusError,
    Utterance,
    load_corpus,
    save_corpus,
    sidecar_path,
    truncate_nbest,
)
from .metrics import (
    AGGREGATIONS,
    CHARACTER,
    MACRO,
    MICRO,
    WORD,
    ZERO_STATS,
    EditStats,
    EvalReport,
    LanguageEval,
    edit_stats,
    metric_kind_for,
    overall_error_rate_from_counts,
    pooled_rate,
    score_selection,
    tokenize,
    write_report_csv,
    write_report_json,
)
from .rerank import (
    BASELINE,
    ORACLE,
    POLICIES,
    RERANK,
    Selection,
    combined_score,
    load_selection,
    load_weights,
    save_selection,
    save_weights,
    select_baseline,
    select_oracle,
    select_rerank,
    validate_weights,
)
from .synth import (
    SynthConfig,
    derive_monolingual,
    empirical_confusion,
    generate,
    load_synth_config,
    uniform_confusion,
)
from .tuner import (
    DEFAULT_RANGES,
    OBJECTIVE_MACRO,
    OBJECTIVE_MICRO,
    OBJECTIVES,
    EvalTable,
    Trial,
    TunerConfig,
    TunerResult,
    default_search_space,
    evaluate_weights,
    load_tuner_config,
    tune,
    validate_search_space,
    write_trial_log,
    write_tuner_result,
)

__all__ = [
    "__version__",
    # corpus
    "CANONICAL_FEATURES",
    "DEFAULT_CHAR_LANGUAGES",
    "LIST_KINDS",
    "MONOLINGUAL",
    "MULTILINGUAL",
    "Candidate",
    "Corpus",
    "CorpusError",
    "Utterance",
    "load_corpus",
    "save_corpus",
    "sidecar_path",
    "truncate_nbest",
    # metrics
    "AGGREGATIONS",
    "CHARACTER",
    "MACRO",
    "MICRO",
    "WORD",
    "ZERO_STATS",
    "EditStats",
    "EvalReport",
    "LanguageEval",
    "edit_stats",
    "metric_kind_for",
    "overall_error_rate_from_counts",
    "pooled_rate",
    "score_selection",
    "tokenize",
    "write_report_csv",
    "write_report_json",
    # rerank
    "BASELINE",
    "ORACLE",
    "POLICIES",
    "RERANK",
    "Selection",
    "combined_score",
    "load_selection",
    "load_weights",
    "save_selection",
    "save_weights",
    "select_baseline",
    "select_oracle",
    "select_rerank",
    "validate_weights",
    # tuner
    "DEFAULT_RANGES",
    "OBJECTIVE_MACRO",
    "OBJECTIVE_MICRO",
    "OBJECTIVES",
    "EvalTable",
    "Trial",
    "TunerConfig",
    "TunerResult",
    "default_search_space",
    "evaluate_weights",
    "load_tuner_config",
    "tune",
    "validate_search_space",
    "write_trial_log",
    "write_tuner_result",
    # synth
    "SynthConfig",
    "derive_monolingual",
    "empirical_confusion",
    "generate",
    "load_synth_config",
    "uniform_confusion",
    # analysis
    "AblationStep",
    "CompareReport",
    "CompareRow",
    "SubsetBreakdown",
    "SweepPoint",
    "TailReport",
    "TailRow",
    "ablate_features",
    "compare_list_kinds",
    "format_sweep_text",
    "format_table",
    "format_tail_text",
    "subset_breakdown",
    "sweep_n",
    "tail_report",
    "write_ablation_csv",
    "write_breakdown_csv",
    "write_compare_csv",
    "write_json",
    "write_sweep_csv",
    "write_tail_csv",
]
