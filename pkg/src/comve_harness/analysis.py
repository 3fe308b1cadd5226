"""Evaluation and drill-down procedures.

Accuracy against gold labels, cross-model agreement, per-kind accuracy
breakdown, and the ambiguity-replacement experiment: overwrite the
ensemble's low-confidence hard labels with each member's own hard
labels in turn and re-score, which attributes competence on exactly
the samples the ensemble was unsure about.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .ensemble import EnsembleOutput
from .errors import ValidationError
from .taxonomy import SampleKind


def accuracy(pred_labels: Mapping[int, int], gold_labels: Mapping[int, int]) -> float:
    """Fraction of matching labels over id-aligned predictions."""
    if not gold_labels:
        raise ValidationError("accuracy over an empty label set is undefined")
    if pred_labels.keys() != gold_labels.keys():
        missing = sorted(gold_labels.keys() - pred_labels.keys())[:5]
        extra = sorted(pred_labels.keys() - gold_labels.keys())[:5]
        raise ValidationError(
            f"prediction/gold id mismatch (missing {missing}, unknown {extra})"
        )
    matches = sum(1 for i, gold in gold_labels.items() if pred_labels[i] == gold)
    return matches / len(gold_labels)


def agreement(
    member_labels: Mapping[str, Mapping[int, int]]
) -> tuple[float, tuple[int, ...]]:
    """Fraction of instances where all members emit the same hard label,
    plus the sorted ids where they do not."""
    if not member_labels:
        raise ValidationError("agreement requires at least one member")
    members = list(member_labels.values())
    ids = members[0].keys()
    for name, labels in member_labels.items():
        if labels.keys() != ids:
            raise ValidationError(f"member {name} does not cover the same ids")
    if not ids:
        raise ValidationError("agreement over an empty id set is undefined")
    disagreeing = tuple(
        sorted(i for i in ids if len({m[i] for m in members}) > 1)
    )
    return 1.0 - len(disagreeing) / len(ids), disagreeing


def per_type_accuracy(
    pred_labels: Mapping[int, int],
    gold_labels: Mapping[int, int],
    types: Mapping[int, SampleKind],
) -> dict[SampleKind, float]:
    """Accuracy restricted to each structural kind; kinds with no
    instances are absent from the result rather than reported as 0."""
    if pred_labels.keys() != gold_labels.keys():
        raise ValidationError("prediction/gold id mismatch")
    missing_types = gold_labels.keys() - types.keys()
    if missing_types:
        raise ValidationError(
            f"no type assignment for ids {sorted(missing_types)[:5]}"
        )
    totals: dict[SampleKind, int] = {}
    correct: dict[SampleKind, int] = {}
    for i, gold in gold_labels.items():
        kind = types[i]
        totals[kind] = totals.get(kind, 0) + 1
        if pred_labels[i] == gold:
            correct[kind] = correct.get(kind, 0) + 1
    return {
        kind: correct.get(kind, 0) / totals[kind]
        for kind in SampleKind
        if kind in totals
    }


@dataclass(frozen=True)
class EvalReport:
    """Headline numbers for one prediction set against gold labels."""

    task: str
    overall_accuracy: float
    n_instances: int
    n_ambiguous: int
    per_type_accuracy: Optional[dict[SampleKind, float]] = None
    per_type_counts: Optional[dict[SampleKind, int]] = None
    agreement_fraction: Optional[float] = None

    def __post_init__(self) -> None:
        fractions = [self.overall_accuracy]
        if self.per_type_accuracy:
            fractions.extend(self.per_type_accuracy.values())
        if self.agreement_fraction is not None:
            fractions.append(self.agreement_fraction)
        if any(not 0.0 <= f <= 1.0 for f in fractions):
            raise ValidationError("report fractions must lie in [0, 1]")
        if self.per_type_counts is not None:
            if sum(self.per_type_counts.values()) != self.n_instances:
                raise ValidationError("per-type counts must sum to n_instances")


@dataclass(frozen=True)
class ReplacementTable:
    """Per-member accuracy when the ensemble's ambiguous hard labels are
    replaced by that member's own hard labels."""

    rows: tuple[tuple[str, float], ...]
    ambiguous_ids: tuple[int, ...]
    ensemble_accuracy: float


def ambiguity_replacement(
    ensemble_outputs: Sequence[EnsembleOutput],
    member_labels: Mapping[str, Mapping[int, int]],
    gold_labels: Mapping[int, int],
) -> ReplacementTable:
    """Re-score the ensemble with each member supplying the labels for
    the ambiguous instances.

    Non-ambiguous instances keep the ensemble's hard labels for every
    row, so rows differ only on the ambiguous id set.
    """
    ensemble_hard = {out.instance_id: out.hard_label for out in ensemble_outputs}
    if ensemble_hard.keys() != gold_labels.keys():
        raise ValidationError("ensemble outputs do not cover the gold ids")
    if any(out.ambiguous is None for out in ensemble_outputs):
        raise ValidationError("ensemble outputs carry no ambiguity flags")
    ambiguous_ids = tuple(
        sorted(out.instance_id for out in ensemble_outputs if out.ambiguous)
    )
    rows = []
    for name, labels in member_labels.items():
        if labels.keys() != ensemble_hard.keys():
            raise ValidationError(f"member {name} does not cover the ensemble ids")
        replaced = dict(ensemble_hard)
        for i in ambiguous_ids:
            replaced[i] = labels[i]
        rows.append((name, accuracy(replaced, gold_labels)))
    return ReplacementTable(
        rows=tuple(rows),
        ambiguous_ids=ambiguous_ids,
        ensemble_accuracy=accuracy(ensemble_hard, gold_labels),
    )


# --- rendering --------------------------------------------------------------


def _pct(fraction: float) -> str:
    """Percent with one decimal, e.g. 0.959 -> '95.9'."""
    return f"{100.0 * fraction:.1f}"


def render_report(
    report: EvalReport, table: Optional[ReplacementTable] = None
) -> tuple[str, dict]:
    """Deterministic text table plus a JSON-safe document.

    Text accuracies are percentages with one decimal; the document
    keeps full precision and re-parses to equal values.
    """
    lines = [
        f"task {report.task} evaluation",
        f"  instances          {report.n_instances}",
        f"  accuracy           {_pct(report.overall_accuracy)}",
        f"  ambiguous          {report.n_ambiguous}",
    ]
    if report.agreement_fraction is not None:
        lines.append(f"  full agreement     {_pct(report.agreement_fraction)}")
    if report.per_type_accuracy:
        lines.append("  accuracy by kind")
        for kind in SampleKind:
            if kind in report.per_type_accuracy:
                count = (
                    report.per_type_counts.get(kind, 0)
                    if report.per_type_counts
                    else 0
                )
                lines.append(
                    f"    {kind.value:<6} {_pct(report.per_type_accuracy[kind]):>6}"
                    f"   (n={count})"
                )
    if table is not None and table.rows:
        lines.append(
            f"  ambiguity replacement ({len(table.ambiguous_ids)} ambiguous, "
            f"ensemble {_pct(table.ensemble_accuracy)})"
        )
        for name, acc in table.rows:
            lines.append(f"    {name:<18} {_pct(acc):>6}")
    text = "\n".join(lines) + "\n"

    doc: dict = {
        "task": report.task,
        "overall_accuracy": report.overall_accuracy,
        "n_instances": report.n_instances,
        "n_ambiguous": report.n_ambiguous,
    }
    if report.agreement_fraction is not None:
        doc["agreement_fraction"] = report.agreement_fraction
    if report.per_type_accuracy is not None:
        doc["per_type_accuracy"] = {
            kind.value: acc for kind, acc in report.per_type_accuracy.items()
        }
    if report.per_type_counts is not None:
        doc["per_type_counts"] = {
            kind.value: count for kind, count in report.per_type_counts.items()
        }
    if table is not None:
        doc["ambiguity_replacement"] = {
            "ambiguous_ids": list(table.ambiguous_ids),
            "ensemble_accuracy": table.ensemble_accuracy,
            "rows": [{"model": name, "accuracy": acc} for name, acc in table.rows],
        }
    # the document must survive a JSON round-trip unchanged
    round_tripped = json.loads(json.dumps(doc))
    if round_tripped != doc:
        raise ValidationError("report document does not round-trip through JSON")
    return text, doc
