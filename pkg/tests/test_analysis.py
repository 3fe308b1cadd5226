"""Accuracy, agreement, per-kind breakdowns, and replacement analysis."""

from __future__ import annotations

import json

import pytest

from comve_harness import (
    EnsembleConfig,
    EvalReport,
    ModelInfo,
    SampleKind,
    ValidationError,
    accuracy,
    agreement,
    ambiguity_replacement,
    combine_predictions,
    harden_predictions,
    load_external_predictions,
    load_task_a,
    per_type_accuracy,
    render_report,
    run_ensemble,
)
from comve_harness.analysis import ReplacementTable, _pct
from comve_harness.scoring import SoftPrediction


def test_accuracy_basic():
    assert accuracy({1: 0, 2: 1}, {1: 0, 2: 0}) == 0.5
    assert accuracy({1: 0}, {1: 0}) == 1.0


def test_accuracy_requires_aligned_ids():
    with pytest.raises(ValidationError, match="mismatch"):
        accuracy({1: 0}, {1: 0, 2: 1})
    with pytest.raises(ValidationError, match="empty"):
        accuracy({}, {})


def test_agreement():
    fraction, ids = agreement(
        {
            "a": {1: 0, 2: 1, 3: 1},
            "b": {1: 0, 2: 0, 3: 1},
            "c": {1: 0, 2: 1, 3: 0},
        }
    )
    assert fraction == pytest.approx(1 / 3)
    assert ids == (2, 3)
    full, none_ids = agreement({"a": {1: 0}, "b": {1: 0}})
    assert full == 1.0 and none_ids == ()


def test_agreement_requires_same_ids():
    with pytest.raises(ValidationError, match="same ids"):
        agreement({"a": {1: 0}, "b": {2: 0}})
    with pytest.raises(ValidationError, match="at least one"):
        agreement({})


def test_per_type_accuracy_omits_absent_kinds():
    pred = {1: 0, 2: 1, 3: 1}
    gold = {1: 0, 2: 0, 3: 1}
    types = {
        1: SampleKind.SINGLE_SUBSTITUTION,
        2: SampleKind.SINGLE_SUBSTITUTION,
        3: SampleKind.REORDERED,
    }
    result = per_type_accuracy(pred, gold, types)
    assert result == {
        SampleKind.SINGLE_SUBSTITUTION: 0.5,
        SampleKind.REORDERED: 1.0,
    }
    assert SampleKind.UNSTRUCTURED not in result


def test_per_type_accuracy_requires_type_cover():
    with pytest.raises(ValidationError, match="no type assignment"):
        per_type_accuracy({1: 0}, {1: 0}, {})


def test_eval_report_validation():
    with pytest.raises(ValidationError, match=r"\[0, 1\]"):
        EvalReport(task="A", overall_accuracy=1.2, n_instances=1, n_ambiguous=0)
    with pytest.raises(ValidationError, match="sum to n_instances"):
        EvalReport(
            task="A",
            overall_accuracy=0.5,
            n_instances=10,
            n_ambiguous=0,
            per_type_counts={SampleKind.SINGLE_SUBSTITUTION: 3},
        )


def _fixture_outputs(fixtures_dir):
    root = fixtures_dir / "replacement10"
    ds = load_task_a(root / "data.csv", root / "answers.csv")
    a = load_external_predictions(root / "memberA.jsonl", ds)
    b = load_external_predictions(root / "memberB.jsonl", ds)
    config = EnsembleConfig.from_dev_scores(
        [ModelInfo(name="member-a", dev_score=0.6), ModelInfo(name="member-b", dev_score=0.4)]
    )
    outputs = run_ensemble(ds, [a, b], config)
    member_labels = {
        "member-a": harden_predictions(a, config),
        "member-b": harden_predictions(b, config),
    }
    return ds, outputs, member_labels


def test_replacement_fixture_rows(fixtures_dir):
    ds, outputs, member_labels = _fixture_outputs(fixtures_dir)
    table = ambiguity_replacement(outputs, member_labels, ds.labels())
    assert table.ambiguous_ids == (1, 2)
    assert table.rows == (("member-a", 0.9), ("member-b", 0.7))
    assert table.ensemble_accuracy == 0.8


def test_replacement_no_ambiguous_is_noop():
    config = EnsembleConfig(
        members=(ModelInfo(name="only", dev_score=1.0),),
        weights=(1.0,),
        threshold=0.5,
        ambiguity_band=(0.5, 0.5),  # degenerate band: nothing flagged but 0.5
    )
    preds = [
        SoftPrediction(instance_id=i, task="A", probs=(p,), model="only")
        for i, p in ((1, 0.9), (2, 0.1), (3, 0.8))
    ]
    outputs = combine_predictions("A", [1, 2, 3], [preds], config)
    assert not any(o.ambiguous for o in outputs)
    gold = {1: 1, 2: 1, 3: 0}
    table = ambiguity_replacement(
        outputs, {"only": harden_predictions(preds, config)}, gold
    )
    assert table.ambiguous_ids == ()
    assert table.rows == (("only", table.ensemble_accuracy),)


def test_replacement_member_identical_to_ensemble(fixtures_dir):
    ds, outputs, _ = _fixture_outputs(fixtures_dir)
    ensemble_hard = {o.instance_id: o.hard_label for o in outputs}
    table = ambiguity_replacement(outputs, {"self": ensemble_hard}, ds.labels())
    assert table.rows == (("self", table.ensemble_accuracy),)


def test_replacement_correct_member_bounds(fixtures_dir):
    # a member right on every ambiguous instance can only help
    ds, outputs, _ = _fixture_outputs(fixtures_dir)
    gold = ds.labels()
    oracle_member = {
        o.instance_id: (gold[o.instance_id] if o.ambiguous else o.hard_label)
        for o in outputs
    }
    table = ambiguity_replacement(outputs, {"oracle": oracle_member}, gold)
    assert table.rows[0][1] >= table.ensemble_accuracy


def test_replacement_requires_flags():
    outputs = [
        type(o)(
            instance_id=o.instance_id,
            task=o.task,
            y=o.y,
            hard_label=o.hard_label,
            ambiguous=None,
        )
        for o in combine_predictions(
            "A",
            [1],
            [[SoftPrediction(instance_id=1, task="A", probs=(0.9,), model="m")]],
            EnsembleConfig(members=(ModelInfo(name="m", dev_score=1.0),), weights=(1.0,)),
        )
    ]
    with pytest.raises(ValidationError, match="no ambiguity flags"):
        ambiguity_replacement(outputs, {"m": {1: 1}}, {1: 1})


def test_pct_formatting():
    assert _pct(0.959) == "95.9"
    assert _pct(1.0) == "100.0"
    assert _pct(0.66666) == "66.7"
    assert _pct(0.0) == "0.0"


def test_render_report_text_and_json():
    report = EvalReport(
        task="A",
        overall_accuracy=0.959,
        n_instances=1000,
        n_ambiguous=12,
        per_type_accuracy={
            SampleKind.SINGLE_SUBSTITUTION: 0.97,
            SampleKind.REORDERED: 0.9,
        },
        per_type_counts={
            SampleKind.SINGLE_SUBSTITUTION: 600,
            SampleKind.REORDERED: 400,
        },
        agreement_fraction=0.8,
    )
    table = ReplacementTable(
        rows=(("model-one", 0.96), ("model-two", 0.94)),
        ambiguous_ids=(3, 9),
        ensemble_accuracy=0.959,
    )
    text, doc = render_report(report, table)
    assert "accuracy           95.9" in text
    assert "full agreement     80.0" in text
    assert "TypeA    97.0   (n=600)" in text
    assert "model-one" in text and "96.0" in text
    assert text.endswith("\n")
    assert doc["overall_accuracy"] == 0.959  # full precision in the document
    assert doc["per_type_accuracy"] == {"TypeA": 0.97, "TypeB": 0.9}
    assert doc["ambiguity_replacement"]["rows"][0] == {
        "model": "model-one",
        "accuracy": 0.96,
    }
    assert json.loads(json.dumps(doc)) == doc


def test_render_report_minimal():
    report = EvalReport(task="B", overall_accuracy=0.5, n_instances=4, n_ambiguous=0)
    text, doc = render_report(report)
    assert "task B evaluation" in text
    assert "agreement" not in text
    assert set(doc) == {"task", "overall_accuracy", "n_instances", "n_ambiguous"}
