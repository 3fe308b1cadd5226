"""Commonsense-validation evaluation and ensembling harness.

Ingests two-task commonsense benchmark CSVs, classifies sentence pairs
into three structural kinds, scores instances with a smoothed n-gram
language model or externally supplied predictions, combines members by
dev-score-weighted soft voting, and evaluates the results (accuracy,
agreement, per-kind breakdown, ambiguity replacement).
"""

__version__ = "0.1.0"

from .analysis import (
    EvalReport,
    ReplacementTable,
    accuracy,
    agreement,
    ambiguity_replacement,
    per_type_accuracy,
    render_report,
)
from .data import (
    TASK_A,
    TASK_B,
    Dataset,
    InstanceA,
    InstanceB,
    ModelInfo,
    dataset_to_csv,
    label_balance,
    load_task_a,
    load_task_b,
    parse_task_a_csv,
    parse_task_b_csv,
    write_task_a,
    write_task_b,
)
from .ensemble import (
    DEFAULT_BAND,
    DEFAULT_THRESHOLD,
    EnsembleConfig,
    EnsembleOutput,
    combine_predictions,
    compute_weights,
    flag_ambiguous,
    harden,
    harden_predictions,
    run_ensemble,
    weighted_sum,
)
from .errors import HarnessError, InternalCheckError, ValidationError
from .scoring import (
    NGramModel,
    SoftPrediction,
    load_external_predictions,
    load_model,
    masked_token_compare,
    save_model,
    score_options_concat,
    score_pair_lm,
    sentence_logprob,
    softmax,
    train_ngram,
    write_predictions,
)
from .taxonomy import (
    DegeneratePairWarning,
    SampleKind,
    SampleType,
    classify_instance,
    classify_pair,
    tokenize,
    type_distribution,
)

__all__ = [
    "__version__",
    "TASK_A",
    "TASK_B",
    "Dataset",
    "InstanceA",
    "InstanceB",
    "ModelInfo",
    "DEFAULT_BAND",
    "DEFAULT_THRESHOLD",
    "EnsembleConfig",
    "EnsembleOutput",
    "EvalReport",
    "ReplacementTable",
    "HarnessError",
    "InternalCheckError",
    "ValidationError",
    "NGramModel",
    "SoftPrediction",
    "DegeneratePairWarning",
    "SampleKind",
    "SampleType",
    "accuracy",
    "agreement",
    "ambiguity_replacement",
    "classify_instance",
    "classify_pair",
    "combine_predictions",
    "compute_weights",
    "dataset_to_csv",
    "flag_ambiguous",
    "harden",
    "harden_predictions",
    "label_balance",
    "load_external_predictions",
    "load_model",
    "load_task_a",
    "load_task_b",
    "masked_token_compare",
    "parse_task_a_csv",
    "parse_task_b_csv",
    "per_type_accuracy",
    "render_report",
    "run_ensemble",
    "save_model",
    "score_options_concat",
    "score_pair_lm",
    "sentence_logprob",
    "softmax",
    "tokenize",
    "train_ngram",
    "type_distribution",
    "weighted_sum",
    "write_predictions",
    "write_task_a",
    "write_task_b",
]
