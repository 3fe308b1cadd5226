"""The HTTP surface: endpoint behavior and error mapping."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

import comve_harness.service.app as service_app
from comve_harness import InternalCheckError
from comve_harness.service import create_app

A_CSV = "id,sent0,sent1\n1,first one,second one\n2,third one,fourth one\n"
A_ANSWERS = "1,0\n2,1\n"
TRIO_CSV = (
    "id,sent0,sent1\n"
    "1,The sky is blue,The sky is underground\n"
    "2,the man fed the snake a mouse,the man fed the mouse a snake\n"
    "3,The bike overtake the car,The red car went by very fast\n"
)
B_CSV = (
    "id,FalseSent,OptionA,OptionB,OptionC\n"
    "7,he put the elephant in the fridge,elephants are too big,fridges are cold,he was hungry\n"
)


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


def _jsonl(rows):
    return "".join(json.dumps(r) + "\n" for r in rows)


def _member(name, ids_probs, dev=None):
    rows = [
        {"id": i, "task": "A", "probs": [p], "model": name} for i, p in ids_probs
    ]
    payload = {"name": name, "jsonl": _jsonl(rows)}
    if dev is not None:
        payload["dev_score"] = dev
    return payload


def test_health(client):
    doc = client.get("/health").json()
    assert doc["status"] == "ok" and doc["version"]


def test_parse_a(client):
    resp = client.post(
        "/datasets/parse-a", json={"data_csv": A_CSV, "answers_csv": A_ANSWERS}
    )
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["n_instances"] == 2 and doc["labeled"]
    assert doc["split"] == "train"
    assert doc["label_balance"] == {"0": 1, "1": 1}
    assert doc["instances"][0] == {
        "id": 1,
        "sent0": "first one",
        "sent1": "second one",
        "label": 0,
    }


def test_parse_a_invalid_csv_is_422(client):
    resp = client.post("/datasets/parse-a", json={"data_csv": "bad,header\n1,x\n"})
    assert resp.status_code == 422
    assert "expected header" in resp.json()["detail"]


def test_parse_b(client):
    resp = client.post("/datasets/parse-b", json={"data_csv": B_CSV})
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["task"] == "B" and not doc["labeled"]
    assert doc["instances"][0]["options"] == [
        "elephants are too big",
        "fridges are cold",
        "he was hungry",
    ]


def test_request_schema_errors_are_422(client):
    resp = client.post("/datasets/parse-a", json={})
    assert resp.status_code == 422


def test_classify(client):
    resp = client.post("/taxonomy/classify", json={"data_csv": TRIO_CSV})
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["distribution"] == {"TypeA": 1, "TypeB": 1, "TypeC": 1}
    assert doc["csv"] == "id,type\n1,TypeA\n2,TypeB\n3,TypeC\n"
    by_id = {a["id"]: a for a in doc["assignments"]}
    assert by_id[1]["position"] == 3
    assert by_id[1]["tokens"] == ["blue", "underground"]
    assert by_id[2]["permutation"] is not None
    assert not by_id[1]["degenerate"]


def test_train_and_score_pairs(client):
    corpus = "the cat sat on the mat\nthe dog sat on the rug\nthe cat ate the fish\n"
    trained = client.post(
        "/lm/train", json={"corpus_text": corpus, "order": 2, "alpha": 0.1}
    )
    assert trained.status_code == 200
    doc = trained.json()
    assert doc["order"] == 2 and doc["n_sentences"] == 3
    model_json = doc["model_json"]

    data_csv = "id,sent0,sent1\n1,the cat sat on the mat,the mat sat on the cat\n"
    scored = client.post(
        "/score/pairs",
        json={"model_json": model_json, "data_csv": data_csv, "method": "pair"},
    )
    assert scored.status_code == 200
    out = scored.json()
    assert out["n"] == 1 and out["n_fallback"] == 0
    line = json.loads(out["jsonl"].strip())
    assert line["task"] == "A" and line["model"] == "ngram"
    assert line["probs"][0] > 0.5  # corpus sentence on side 0


def test_score_pairs_masked_fallback(client):
    corpus = "a b c\nb c d\n"
    model_json = client.post(
        "/lm/train", json={"corpus_text": corpus, "order": 2}
    ).json()["model_json"]
    data_csv = "id,sent0,sent1\n1,a b c,a x c\n2,a b c,c b a\n"
    out = client.post(
        "/score/pairs",
        json={"model_json": model_json, "data_csv": data_csv, "method": "masked"},
    ).json()
    assert out["n"] == 2
    assert out["n_fallback"] == 1  # the reorder pair cannot use masking
    models = [json.loads(l)["model"] for l in out["jsonl"].splitlines()]
    assert models == ["ngram-masked", "ngram-masked"]


def test_score_options(client):
    corpus = "elephants are too big\nfridges are cold\n"
    model_json = client.post("/lm/train", json={"corpus_text": corpus}).json()[
        "model_json"
    ]
    out = client.post(
        "/score/options", json={"model_json": model_json, "data_csv": B_CSV}
    ).json()
    line = json.loads(out["jsonl"].strip())
    assert len(line["probs"]) == 3
    assert abs(sum(line["probs"]) - 1.0) < 1e-9


def test_bad_model_json_is_422(client):
    resp = client.post(
        "/score/pairs", json={"model_json": "{}", "data_csv": A_CSV}
    )
    assert resp.status_code == 422


def test_validate_predictions(client):
    jsonl = _jsonl(
        [
            {"id": 1, "task": "A", "probs": [0.5], "model": "x"},
            {"id": 2, "task": "A", "probs": [0.25], "model": "y"},
        ]
    )
    resp = client.post(
        "/predictions/validate",
        json={"task": "A", "data_csv": A_CSV, "jsonl": jsonl},
    )
    assert resp.json() == {"n": 2, "models": ["x", "y"]}
    missing = client.post(
        "/predictions/validate",
        json={"task": "A", "data_csv": A_CSV, "jsonl": jsonl.splitlines()[0]},
    )
    assert missing.status_code == 422
    assert "coverage" in missing.json()["detail"]


def test_ensemble_single_member_identity(client):
    member = _member("solo", [(1, 0.9), (2, 0.2)])
    resp = client.post(
        "/ensemble/run",
        json={"task": "A", "data_csv": A_CSV, "members": [member]},
    )
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["weights"] == [1.0]
    assert doc["labels_csv"] == "1,1\n2,0\n"
    probs = [json.loads(l)["probs"][0] for l in doc["jsonl"].splitlines()]
    assert probs == [0.9, 0.2]
    assert doc["n_ambiguous"] == 0


def test_ensemble_multi_member_requires_dev_scores(client):
    members = [
        _member("a", [(1, 0.9), (2, 0.2)]),
        _member("b", [(1, 0.8), (2, 0.4)]),
    ]
    resp = client.post(
        "/ensemble/run", json={"task": "A", "data_csv": A_CSV, "members": members}
    )
    assert resp.status_code == 422
    assert "dev_score" in resp.json()["detail"]


def test_ensemble_task_b_letter_labels(client):
    rows = [{"id": 7, "task": "B", "probs": [0.2, 0.5, 0.3], "model": "m"}]
    resp = client.post(
        "/ensemble/run",
        json={
            "task": "B",
            "data_csv": B_CSV,
            "members": [{"name": "m", "jsonl": _jsonl(rows)}],
        },
    )
    doc = resp.json()
    assert doc["labels_csv"] == "7,B\n"
    assert doc["n_ambiguous"] is None


def test_eval_report(client):
    member = _member("solo", [(1, 0.1), (2, 0.9)])
    resp = client.post(
        "/eval/report",
        json={
            "task": "A",
            "data_csv": A_CSV,
            "answers_csv": A_ANSWERS,
            "predictions_jsonl": member["jsonl"],
            "with_types": True,
        },
    )
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["report"]["overall_accuracy"] == 1.0
    assert doc["report"]["n_instances"] == 2
    assert "task A evaluation" in doc["text"] and "100.0" in doc["text"]
    assert "per_type_accuracy" in doc["report"]


def test_eval_report_agreement(client):
    preds = _member("solo", [(1, 0.1), (2, 0.9)])
    other = _member("other", [(1, 0.9), (2, 0.9)])
    resp = client.post(
        "/eval/report",
        json={
            "task": "A",
            "data_csv": A_CSV,
            "answers_csv": A_ANSWERS,
            "predictions_jsonl": preds["jsonl"],
            "members": [other],
            "with_types": False,
        },
    )
    doc = resp.json()
    assert doc["report"]["agreement_fraction"] == 0.5


def test_analysis_ambiguity_fixture(client, fixtures_dir):
    root = fixtures_dir / "replacement10"
    resp = client.post(
        "/analysis/ambiguity",
        json={
            "task": "A",
            "data_csv": (root / "data.csv").read_text(),
            "answers_csv": (root / "answers.csv").read_text(),
            "members": [
                {
                    "name": "member-a",
                    "dev_score": 0.6,
                    "jsonl": (root / "memberA.jsonl").read_text(),
                },
                {
                    "name": "member-b",
                    "dev_score": 0.4,
                    "jsonl": (root / "memberB.jsonl").read_text(),
                },
            ],
        },
    )
    assert resp.status_code == 200
    doc = resp.json()
    replacement = doc["report"]["ambiguity_replacement"]
    assert replacement["ambiguous_ids"] == [1, 2]
    assert replacement["rows"] == [
        {"model": "member-a", "accuracy": 0.9},
        {"model": "member-b", "accuracy": 0.7},
    ]
    assert replacement["ensemble_accuracy"] == 0.8
    assert "member-a" in doc["text"]


def test_internal_invariant_maps_to_500(client, monkeypatch):
    def boom(*args, **kwargs):
        raise InternalCheckError("invariant broken")

    monkeypatch.setattr(service_app, "combine_predictions", boom)
    member = _member("solo", [(1, 0.9), (2, 0.2)])
    resp = client.post(
        "/ensemble/run",
        json={"task": "A", "data_csv": A_CSV, "members": [member]},
    )
    assert resp.status_code == 500
    assert "invariant broken" in resp.json()["detail"]
