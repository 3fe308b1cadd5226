"""Soft-prediction producers.

Three sources of per-instance probabilities share one output type:

* a trainable n-gram language model with additive smoothing, scoring
  task-A pairs by length-normalized log-likelihood and task-B options
  by statement+reason concatenation;
* a masked-token comparison that, for single-substitution pairs, scores
  the two candidate tokens in their shared context;
* external prediction files in the JSONL interchange format (one
  object per line: ``{"id": ..., "task": "A"|"B", "probs": [...],
  "model": "..."}``; one float for task A, three for task B).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .data import TASK_A, TASK_B, Dataset, InstanceA, InstanceB
from .errors import InternalCheckError, ValidationError
from .taxonomy import SampleKind, SampleType, TokenSeq, tokenize

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SEP = "<sep>"

MODEL_FORMAT = "ngram-counts-v1"


class NGramModel:
    """Additively smoothed n-gram model over word tokens.

    Sentences are padded with ``order - 1`` begin markers and one end
    marker. The vocabulary is the set of observed tokens plus the
    unknown symbol and the end marker; begin markers are context-only
    and never predicted. For a context with total count T,
    ``P(w | ctx) = (count + alpha) / (T + alpha * |V|)``, which sums to
    one over the vocabulary for every context. Immutable after
    training.
    """

    def __init__(
        self,
        order: int,
        alpha: float,
        counts: dict[tuple[str, ...], Counter],
        vocabulary: frozenset[str],
    ) -> None:
        if order < 1:
            raise ValidationError(f"n-gram order must be >= 1, got {order}")
        if not alpha > 0:
            raise ValidationError(f"smoothing alpha must be positive, got {alpha}")
        self.order = order
        self.alpha = alpha
        self.counts = counts
        self.context_totals = {ctx: sum(c.values()) for ctx, c in counts.items()}
        self.vocabulary = vocabulary

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    def _norm(self, token: str) -> str:
        if token == BOS or token in self.vocabulary:
            return token
        return UNK

    def prob(self, context: Sequence[str], token: str) -> float:
        """Smoothed P(token | context); unknown tokens map to the
        unknown symbol on both sides."""
        ctx = tuple(self._norm(t) for t in context)
        if len(ctx) != self.order - 1:
            raise ValidationError(
                f"context length {len(ctx)} does not match order {self.order}"
            )
        count = self.counts.get(ctx, _EMPTY).get(self._norm(token), 0)
        total = self.context_totals.get(ctx, 0)
        return (count + self.alpha) / (total + self.alpha * self.vocab_size)

    def logprob(self, context: Sequence[str], token: str) -> float:
        return math.log(self.prob(context, token))


_EMPTY: Counter = Counter()


def train_ngram(
    corpus: Iterable[Sequence[str]], n: int = 3, alpha: float = 0.1
) -> NGramModel:
    """Count n-grams over tokenized sentences and freeze a model."""
    if n < 1:
        raise ValidationError(f"n-gram order must be >= 1, got {n}")
    if not alpha > 0:
        raise ValidationError(f"smoothing alpha must be positive, got {alpha}")
    counts: dict[tuple[str, ...], Counter] = {}
    vocab: set[str] = set()
    n_sentences = 0
    for sentence in corpus:
        if not sentence:
            raise ValidationError("corpus contains an empty sentence")
        n_sentences += 1
        tokens = list(sentence)
        vocab.update(tokens)
        padded = [BOS] * (n - 1) + tokens + [EOS]
        for i in range(n - 1, len(padded)):
            context = tuple(padded[i - n + 1 : i])
            counts.setdefault(context, Counter())[padded[i]] += 1
    if n_sentences == 0:
        raise ValidationError("training corpus is empty")
    vocab.update((UNK, EOS))
    return NGramModel(order=n, alpha=alpha, counts=counts, vocabulary=frozenset(vocab))


def _padded(model: NGramModel, tokens: Sequence[str]) -> list[str]:
    return [BOS] * (model.order - 1) + list(tokens) + [EOS]


def _event_logprob(model: NGramModel, padded: list[str], position: int) -> float:
    """Log-probability of the event at sentence position ``position``
    (the end marker counts as position len(tokens))."""
    i = position + model.order - 1
    return model.logprob(padded[i - model.order + 1 : i], padded[i])


def sentence_logprob(model: NGramModel, tokens: Sequence[str]) -> float:
    """Mean per-event natural-log probability of a sentence.

    Events are each token plus the end marker, so a sentence of m
    tokens averages over m + 1 smoothed probabilities; the result is
    always finite.
    """
    if not tokens:
        raise ValidationError("cannot score an empty token sequence")
    padded = _padded(model, tokens)
    total = sum(
        _event_logprob(model, padded, pos) for pos in range(len(tokens) + 1)
    )
    return total / (len(tokens) + 1)


def _two_way_prob(s0: float, s1: float) -> float:
    """softmax([s0, s1])[0], computed so that swapping the arguments
    yields exactly 1 - p."""
    if s0 == s1:
        return 0.5
    if s0 < s1:
        return 1.0 - _two_way_prob(s1, s0)
    return 1.0 / (1.0 + math.exp(s1 - s0))


def softmax(scores: Sequence[float]) -> tuple[float, ...]:
    """Standard softmax with max-subtraction; inputs must be finite."""
    if not scores:
        raise ValidationError("softmax requires a non-empty score vector")
    if any(not math.isfinite(s) for s in scores):
        raise ValidationError(f"softmax requires finite scores, got {list(scores)}")
    peak = max(scores)
    exps = [math.exp(s - peak) for s in scores]
    total = sum(exps)
    return tuple(e / total for e in exps)


@dataclass(frozen=True)
class SoftPrediction:
    """One model's probability output for one instance.

    Task A carries a single probability (that sentence index 1 is the
    invalid one); task B carries a 3-vector over the options summing
    to one.
    """

    instance_id: int
    task: str
    probs: tuple[float, ...]
    model: str

    def __post_init__(self) -> None:
        if self.task == TASK_A:
            if len(self.probs) != 1:
                raise ValidationError(
                    f"prediction {self.instance_id}: task A needs exactly 1 "
                    f"probability, got {len(self.probs)}"
                )
            p = self.probs[0]
            if not (math.isfinite(p) and 0.0 <= p <= 1.0):
                raise ValidationError(
                    f"prediction {self.instance_id}: probability {p} outside [0, 1]"
                )
        elif self.task == TASK_B:
            if len(self.probs) != 3:
                raise ValidationError(
                    f"prediction {self.instance_id}: task B needs exactly 3 "
                    f"probabilities, got {len(self.probs)}"
                )
            if any(not math.isfinite(p) or p < 0.0 for p in self.probs):
                raise ValidationError(
                    f"prediction {self.instance_id}: probabilities must be "
                    f"non-negative, got {list(self.probs)}"
                )
            if abs(sum(self.probs) - 1.0) > 1e-9:
                raise ValidationError(
                    f"prediction {self.instance_id}: probabilities sum to "
                    f"{sum(self.probs)!r}, expected 1"
                )
        else:
            raise ValidationError(f"task must be 'A' or 'B', got {self.task!r}")

    @property
    def scalar(self) -> float:
        """The task-A probability."""
        if self.task != TASK_A:
            raise ValidationError("scalar is defined for task A predictions only")
        return self.probs[0]


def score_pair_lm(
    model: NGramModel, inst: InstanceA, model_name: str = "ngram"
) -> SoftPrediction:
    """Compare the two sentences' length-normalized log-likelihoods.

    The returned probability is the softmax mass on sentence 0 being
    the likelier one, i.e. the probability that sentence 1 is invalid.
    """
    ll0 = sentence_logprob(model, tokenize(inst.sent0))
    ll1 = sentence_logprob(model, tokenize(inst.sent1))
    return SoftPrediction(
        instance_id=inst.id,
        task=TASK_A,
        probs=(_two_way_prob(ll0, ll1),),
        model=model_name,
    )


def _masked_context_score(model: NGramModel, tokens: TokenSeq, k: int) -> float:
    """Mean log-probability over the events whose context window covers
    position k: the event predicting k itself plus the following
    order - 1 events (the end marker included when in range)."""
    padded = _padded(model, tokens)
    last = min(k + model.order - 1, len(tokens))
    events = range(k, last + 1)
    return sum(_event_logprob(model, padded, pos) for pos in events) / len(events)


def masked_token_compare(
    model: NGramModel,
    inst: InstanceA,
    sample_type: SampleType,
    model_name: str = "ngram-masked",
) -> SoftPrediction:
    """Score the two candidate tokens of a single-substitution pair in
    their shared context.

    Applicable only to ``TypeA`` verdicts; both directions around the
    masked position are averaged so the comparison sees the following
    tokens as well as the preceding ones.
    """
    if sample_type.kind is not SampleKind.SINGLE_SUBSTITUTION:
        raise ValidationError(
            f"masked comparison is inapplicable to {sample_type.kind.value} pairs"
        )
    tokens0 = tokenize(inst.sent0)
    tokens1 = tokenize(inst.sent1)
    k = sample_type.position
    assert sample_type.tokens is not None and k is not None
    if (
        len(tokens0) != len(tokens1)
        or k >= len(tokens0)
        or (tokens0[k], tokens1[k]) != sample_type.tokens
    ):
        raise ValidationError(
            f"instance {inst.id}: verdict evidence does not match the sentence pair"
        )
    c0 = _masked_context_score(model, tokens0, k)
    c1 = _masked_context_score(model, tokens1, k)
    return SoftPrediction(
        instance_id=inst.id,
        task=TASK_A,
        probs=(_two_way_prob(c0, c1),),
        model=model_name,
    )


def score_options_concat(
    model: NGramModel, inst: InstanceB, model_name: str = "ngram"
) -> SoftPrediction:
    """Concatenate the false statement with each option (separated by a
    boundary marker) and softmax the three mean log-likelihoods."""
    statement = tokenize(inst.false_statement)
    lls = [
        sentence_logprob(model, statement + (SEP,) + tokenize(option))
        for option in inst.options
    ]
    return SoftPrediction(
        instance_id=inst.id, task=TASK_B, probs=softmax(lls), model=model_name
    )


# --- model (de)serialization ---------------------------------------------


def model_to_payload(model: NGramModel) -> dict:
    """JSON-safe dict carrying the full model state, deterministically
    ordered."""
    contexts = [
        {
            "context": list(ctx),
            "counts": {tok: model.counts[ctx][tok] for tok in sorted(model.counts[ctx])},
        }
        for ctx in sorted(model.counts)
    ]
    return {
        "format": MODEL_FORMAT,
        "order": model.order,
        "alpha": model.alpha,
        "vocabulary": sorted(model.vocabulary),
        "contexts": contexts,
    }


def model_from_payload(payload: dict) -> NGramModel:
    if payload.get("format") != MODEL_FORMAT:
        raise ValidationError(
            f"unsupported model format {payload.get('format')!r}, "
            f"expected {MODEL_FORMAT!r}"
        )
    try:
        order = int(payload["order"])
        alpha = float(payload["alpha"])
        vocabulary = frozenset(payload["vocabulary"])
        counts: dict[tuple[str, ...], Counter] = {}
        for entry in payload["contexts"]:
            context = tuple(entry["context"])
            if len(context) != order - 1:
                raise ValidationError(
                    f"context {context!r} does not match order {order}"
                )
            token_counts = entry["counts"]
            if any(c <= 0 for c in token_counts.values()):
                raise ValidationError(f"context {context!r} has non-positive counts")
            counts[context] = Counter(token_counts)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed model payload: {exc}") from None
    if UNK not in vocabulary or EOS not in vocabulary:
        raise ValidationError("model vocabulary must contain the reserved symbols")
    return NGramModel(order=order, alpha=alpha, counts=counts, vocabulary=vocabulary)


def save_model(model: NGramModel, path: Union[str, Path]) -> None:
    Path(path).write_text(
        json.dumps(model_to_payload(model), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_model(path: Union[str, Path]) -> NGramModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from None
    return model_from_payload(payload)


# --- prediction interchange ------------------------------------------------


def prediction_to_obj(pred: SoftPrediction) -> dict:
    return {
        "id": pred.instance_id,
        "task": pred.task,
        "probs": list(pred.probs),
        "model": pred.model,
    }


def write_predictions(
    path: Union[str, Path], preds: Iterable[SoftPrediction]
) -> None:
    """One JSON object per line, in input order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pred in preds:
            fh.write(json.dumps(prediction_to_obj(pred)) + "\n")


def _obj_to_prediction(obj: dict, task: str, source: str, line_no: int) -> SoftPrediction:
    where = f"{source}: line {line_no}"
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected a JSON object")
    missing = {"id", "task", "probs", "model"} - obj.keys()
    if missing:
        raise ValidationError(f"{where}: missing keys {sorted(missing)}")
    if not isinstance(obj["id"], int) or isinstance(obj["id"], bool):
        raise ValidationError(f"{where}: id must be an integer")
    if obj["task"] != task:
        raise ValidationError(
            f"{where}: task {obj['task']!r} does not match expected task {task!r}"
        )
    if not isinstance(obj["model"], str) or not obj["model"]:
        raise ValidationError(f"{where}: model must be a non-empty string")
    probs = obj["probs"]
    if not isinstance(probs, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs
    ):
        raise ValidationError(f"{where}: probs must be a list of numbers")
    probs = [float(p) for p in probs]
    expected_arity = 1 if task == TASK_A else 3
    if len(probs) != expected_arity:
        raise ValidationError(
            f"{where}: task {task} requires {expected_arity} probabilities, "
            f"got {len(probs)}"
        )
    if task == TASK_B:
        if any(not math.isfinite(p) or p < 0.0 for p in probs):
            raise ValidationError(f"{where}: probabilities must be non-negative")
        total = sum(probs)
        if abs(total - 1.0) > 1e-6:
            raise ValidationError(
                f"{where}: probabilities sum to {total!r}, expected 1 within 1e-6"
            )
        probs = [p / total for p in probs]  # tighten to the type invariant
    try:
        return SoftPrediction(
            instance_id=obj["id"], task=task, probs=tuple(probs), model=obj["model"]
        )
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def parse_prediction_lines(
    lines: Iterable[str],
    task: str,
    ids: Sequence[int],
    source: str = "<predictions>",
) -> list[SoftPrediction]:
    """Validate interchange lines against an instance id set: exact
    coverage, matching task, well-formed probabilities. Returns the
    predictions in id order."""
    by_id: dict[int, SoftPrediction] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"{source}: line {line_no}: not valid JSON: {exc}"
            ) from None
        pred = _obj_to_prediction(obj, task, source, line_no)
        if pred.instance_id in by_id:
            raise ValidationError(
                f"{source}: line {line_no}: duplicate id {pred.instance_id}"
            )
        by_id[pred.instance_id] = pred

    wanted = set(ids)
    missing = wanted - by_id.keys()
    extra = by_id.keys() - wanted
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing predictions for ids {sorted(missing)[:5]}")
        if extra:
            parts.append(f"predictions for unknown ids {sorted(extra)[:5]}")
        raise ValidationError(f"{source}: incomplete coverage: {'; '.join(parts)}")
    ordered = [by_id[i] for i in ids]
    if len(ordered) != len(wanted):
        raise InternalCheckError("prediction join lost instances")
    return ordered


def load_external_predictions(
    file: Union[str, Path], dataset: Dataset
) -> list[SoftPrediction]:
    """Read and validate a JSONL prediction file against a dataset."""
    path = Path(file)
    with open(path, "r", encoding="utf-8") as fh:
        return parse_prediction_lines(fh, dataset.task, dataset.ids(), str(path))
