"""Weighted soft-voting over member predictions.

The final prediction for an instance is the convex combination
``y = sum_i w_i * p_i`` over the N member models, with each weight
derived from that member's accuracy on the development split
(normalized to sum to one). Task-A scalars are hardened at a
threshold (0.5 by default, with the boundary mapping to 1) and flagged
as ambiguous inside a closed band ([0.4, 0.6] by default); task-B
vectors are hardened by argmax with ties going to the lowest option
index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .data import TASK_A, TASK_B, Dataset, ModelInfo
from .errors import ValidationError
from .scoring import SoftPrediction

DEFAULT_THRESHOLD = 0.5
DEFAULT_BAND = (0.4, 0.6)


def compute_weights(members: Sequence[ModelInfo]) -> tuple[float, ...]:
    """Dev scores normalized to sum to one; every member must carry a
    positive dev score."""
    if not members:
        raise ValidationError("at least one member is required")
    scores = []
    for member in members:
        if member.dev_score is None:
            raise ValidationError(f"member {member.name} has no dev_score")
        if member.dev_score <= 0.0:
            raise ValidationError(
                f"member {member.name} has non-positive dev_score {member.dev_score}"
            )
        scores.append(member.dev_score)
    total = sum(scores)
    return tuple(s / total for s in scores)


@dataclass(frozen=True)
class EnsembleConfig:
    """Member identities, their voting weights, and the hardening rules."""

    members: tuple[ModelInfo, ...]
    weights: tuple[float, ...]
    threshold: float = DEFAULT_THRESHOLD
    ambiguity_band: tuple[float, float] = DEFAULT_BAND

    def __post_init__(self) -> None:
        if not self.members:
            raise ValidationError("ensemble needs at least one member")
        if len(self.weights) != len(self.members):
            raise ValidationError(
                f"{len(self.members)} members but {len(self.weights)} weights"
            )
        if any(w < 0.0 or not math.isfinite(w) for w in self.weights):
            raise ValidationError(f"weights must be non-negative, got {self.weights}")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValidationError(
                f"weights must sum to 1, got {sum(self.weights)!r}"
            )
        lo, hi = self.ambiguity_band
        if lo > hi:
            raise ValidationError(f"ambiguity band lower {lo} exceeds upper {hi}")
        if not lo <= self.threshold <= hi:
            raise ValidationError(
                f"threshold {self.threshold} must lie inside the ambiguity band "
                f"[{lo}, {hi}]"
            )

    @classmethod
    def from_dev_scores(
        cls,
        members: Sequence[ModelInfo],
        threshold: float = DEFAULT_THRESHOLD,
        ambiguity_band: tuple[float, float] = DEFAULT_BAND,
    ) -> "EnsembleConfig":
        return cls(
            members=tuple(members),
            weights=compute_weights(members),
            threshold=threshold,
            ambiguity_band=ambiguity_band,
        )


@dataclass(frozen=True)
class EnsembleOutput:
    """Combined soft value, its hardened label, and (task A) the
    ambiguity flag. Ambiguity never suppresses the hard label."""

    instance_id: int
    task: str
    y: tuple[float, ...]
    hard_label: int
    ambiguous: Optional[bool]

    @property
    def scalar(self) -> float:
        if self.task != TASK_A:
            raise ValidationError("scalar is defined for task A outputs only")
        return self.y[0]

    def to_soft_prediction(self, model_name: str = "ensemble") -> SoftPrediction:
        return SoftPrediction(
            instance_id=self.instance_id,
            task=self.task,
            probs=self.y,
            model=model_name,
        )


def weighted_sum(
    preds: Sequence[SoftPrediction], config: EnsembleConfig
) -> Union[float, tuple[float, ...]]:
    """Dot product of member weights with member probabilities,
    elementwise for task-B vectors. Predictions must line up with the
    configured members and agree on instance and task."""
    if len(preds) != len(config.members):
        raise ValidationError(
            f"{len(config.members)} members but {len(preds)} predictions"
        )
    first = preds[0]
    if any(p.instance_id != first.instance_id for p in preds):
        raise ValidationError(
            f"mixed instance ids {sorted({p.instance_id for p in preds})}"
        )
    if any(p.task != first.task for p in preds):
        raise ValidationError("mixed tasks in one weighted sum")
    if first.task == TASK_A:
        return sum(w * p.probs[0] for w, p in zip(config.weights, preds))
    return tuple(
        sum(w * p.probs[j] for w, p in zip(config.weights, preds)) for j in range(3)
    )


def harden(y: float, config: EnsembleConfig) -> int:
    """Threshold a task-A scalar: below the threshold is 0, the
    threshold itself and above is 1."""
    if not (math.isfinite(y) and 0.0 <= y <= 1.0):
        raise ValidationError(f"prediction {y!r} outside [0, 1]")
    return 0 if y < config.threshold else 1


def flag_ambiguous(y: float, config: EnsembleConfig) -> bool:
    """True iff y lies inside the closed ambiguity band."""
    lo, hi = config.ambiguity_band
    return lo <= y <= hi


def _argmax(values: Sequence[float]) -> int:
    """Index of the maximum, lowest index on ties."""
    return max(range(len(values)), key=lambda j: (values[j], -j))


def combine_predictions(
    task: str,
    ids: Sequence[int],
    member_predictions: Sequence[Sequence[SoftPrediction]],
    config: EnsembleConfig,
) -> list[EnsembleOutput]:
    """Combine every member's predictions over an instance id set.

    Each member must cover every id exactly once; outputs come back in
    id order and are fully determined by the inputs.
    """
    if len(member_predictions) != len(config.members):
        raise ValidationError(
            f"{len(config.members)} members configured but "
            f"{len(member_predictions)} prediction sets supplied"
        )
    wanted = set(ids)
    maps: list[dict[int, SoftPrediction]] = []
    for member, preds in zip(config.members, member_predictions):
        by_id = {p.instance_id: p for p in preds}
        if len(by_id) != len(preds):
            raise ValidationError(f"member {member.name}: duplicate instance ids")
        if by_id.keys() != wanted:
            missing = sorted(wanted - by_id.keys())[:5]
            extra = sorted(by_id.keys() - wanted)[:5]
            raise ValidationError(
                f"member {member.name}: coverage gap (missing {missing}, "
                f"unknown {extra})"
            )
        if any(p.task != task for p in preds):
            raise ValidationError(
                f"member {member.name}: prediction task does not match {task!r}"
            )
        maps.append(by_id)

    outputs: list[EnsembleOutput] = []
    for inst_id in ids:
        row = [m[inst_id] for m in maps]
        y = weighted_sum(row, config)
        if task == TASK_A:
            assert isinstance(y, float)
            outputs.append(
                EnsembleOutput(
                    instance_id=inst_id,
                    task=TASK_A,
                    y=(y,),
                    hard_label=harden(y, config),
                    ambiguous=flag_ambiguous(y, config),
                )
            )
        else:
            assert isinstance(y, tuple)
            outputs.append(
                EnsembleOutput(
                    instance_id=inst_id,
                    task=TASK_B,
                    y=y,
                    hard_label=_argmax(y),
                    ambiguous=None,
                )
            )
    return outputs


def run_ensemble(
    dataset: Dataset,
    member_predictions: Sequence[Sequence[SoftPrediction]],
    config: EnsembleConfig,
) -> list[EnsembleOutput]:
    """combine_predictions over a dataset's task and id order."""
    return combine_predictions(dataset.task, dataset.ids(), member_predictions, config)


def harden_predictions(
    preds: Sequence[SoftPrediction], config: EnsembleConfig
) -> dict[int, int]:
    """Hard labels for a single member's predictions (threshold for
    task A, argmax for task B), keyed by instance id."""
    labels: dict[int, int] = {}
    for pred in preds:
        if pred.task == TASK_A:
            labels[pred.instance_id] = harden(pred.probs[0], config)
        else:
            labels[pred.instance_id] = _argmax(pred.probs)
    return labels
