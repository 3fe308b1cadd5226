"""HTTP service exposing the harness as stateless endpoints.

Every endpoint is a pure function of its request body: clients send
file contents (CSV, JSONL, model JSON) and receive file contents back.
Validation failures map to 422, broken internal invariants to 500.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import replace

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..analysis import (
    EvalReport,
    accuracy,
    agreement,
    ambiguity_replacement,
    per_type_accuracy,
    render_report,
)
from ..data import (
    TASK_A,
    Dataset,
    ModelInfo,
    dataset_to_csv,
    label_balance,
    parse_task_a_csv,
    parse_task_b_csv,
)
from ..ensemble import EnsembleConfig, combine_predictions, harden_predictions
from ..errors import InternalCheckError, ValidationError
from ..scoring import (
    masked_token_compare,
    model_from_payload,
    model_to_payload,
    parse_prediction_lines,
    prediction_to_obj,
    score_options_concat,
    score_pair_lm,
    train_ngram,
)
from ..taxonomy import SampleKind, classify_instance, tokenize
from . import schemas


def _parse_dataset(task: str, data_csv: str, answers_csv=None, split=None) -> Dataset:
    parse = parse_task_a_csv if task == TASK_A else parse_task_b_csv
    return parse(data_csv, answers_csv, split)


def _load_model(model_json: str):
    try:
        payload = json.loads(model_json)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model_json is not valid JSON: {exc}") from None
    return model_from_payload(payload)


def _jsonl(preds) -> str:
    return "".join(json.dumps(prediction_to_obj(p)) + "\n" for p in preds)


def _member_inputs(
    task: str, ids, members: list[schemas.MemberPayload]
) -> tuple[list[ModelInfo], list[list]]:
    """Validate each member's JSONL against the instance ids."""
    if not members:
        raise ValidationError("at least one member is required")
    infos, predictions = [], []
    for member in members:
        infos.append(ModelInfo(name=member.name, dev_score=member.dev_score))
        predictions.append(
            parse_prediction_lines(
                member.jsonl.splitlines(), task, ids, f"<member {member.name}>"
            )
        )
    return infos, predictions


def _ensemble_config(
    infos, threshold: float, band: tuple[float, float]
) -> EnsembleConfig:
    return EnsembleConfig.from_dev_scores(
        infos, threshold=threshold, ambiguity_band=band
    )


def _dataset_response(dataset: Dataset):
    balance = None
    if dataset.labeled:
        balance = label_balance(dataset)
    common = {
        "split": dataset.split,
        "n_instances": len(dataset),
        "labeled": dataset.labeled,
        "label_balance": balance,
    }
    if dataset.task == TASK_A:
        return schemas.ParseTaskAResponse(
            instances=[
                schemas.InstanceAModel(
                    id=i.id, sent0=i.sent0, sent1=i.sent1, label=i.label
                )
                for i in dataset
            ],
            **common,
        )
    return schemas.ParseTaskBResponse(
        instances=[
            schemas.InstanceBModel(
                id=i.id,
                false_statement=i.false_statement,
                options=i.options,
                label=i.label,
            )
            for i in dataset
        ],
        **common,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="comve-harness", version=__version__)

    @app.exception_handler(ValidationError)
    async def _validation_error(request: Request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(InternalCheckError)
    async def _internal_error(request: Request, exc: InternalCheckError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/datasets/parse-a", response_model=schemas.ParseTaskAResponse)
    def parse_a(req: schemas.ParseDatasetRequest) -> schemas.ParseTaskAResponse:
        return _dataset_response(
            parse_task_a_csv(req.data_csv, req.answers_csv, req.split)
        )

    @app.post("/datasets/parse-b", response_model=schemas.ParseTaskBResponse)
    def parse_b(req: schemas.ParseDatasetRequest) -> schemas.ParseTaskBResponse:
        return _dataset_response(
            parse_task_b_csv(req.data_csv, req.answers_csv, req.split)
        )

    @app.post("/taxonomy/classify", response_model=schemas.ClassifyResponse)
    def classify(req: schemas.ClassifyRequest) -> schemas.ClassifyResponse:
        dataset = parse_task_a_csv(req.data_csv)
        assignments = []
        distribution = {kind.value: 0 for kind in SampleKind}
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "type"])
        for inst in dataset:
            verdict = classify_instance(inst)
            distribution[verdict.kind.value] += 1
            writer.writerow([inst.id, verdict.kind.value])
            assignments.append(
                schemas.TypeAssignmentModel(
                    id=inst.id,
                    kind=verdict.kind.value,
                    position=verdict.position,
                    tokens=verdict.tokens,
                    permutation=(
                        list(verdict.permutation)
                        if verdict.permutation is not None
                        else None
                    ),
                    degenerate=tokenize(inst.sent0) == tokenize(inst.sent1),
                )
            )
        return schemas.ClassifyResponse(
            assignments=assignments, distribution=distribution, csv=buf.getvalue()
        )

    @app.post("/lm/train", response_model=schemas.TrainLmResponse)
    def train(req: schemas.TrainLmRequest) -> schemas.TrainLmResponse:
        sentences = [
            tokenize(line) for line in req.corpus_text.splitlines() if line.strip()
        ]
        model = train_ngram(sentences, n=req.order, alpha=req.alpha)
        return schemas.TrainLmResponse(
            model_json=json.dumps(model_to_payload(model), indent=2, sort_keys=True)
            + "\n",
            order=model.order,
            alpha=model.alpha,
            vocab_size=model.vocab_size,
            n_contexts=len(model.counts),
            n_sentences=len(sentences),
        )

    @app.post("/score/pairs", response_model=schemas.ScoreResponse)
    def score_pairs(req: schemas.ScorePairsRequest) -> schemas.ScoreResponse:
        model = _load_model(req.model_json)
        dataset = parse_task_a_csv(req.data_csv)
        default_name = "ngram" if req.method == "pair" else "ngram-masked"
        name = req.model_name or default_name
        preds = []
        n_fallback = 0
        for inst in dataset:
            if req.method == "masked":
                verdict = classify_instance(inst)
                if verdict.kind is SampleKind.SINGLE_SUBSTITUTION:
                    preds.append(
                        masked_token_compare(model, inst, verdict, model_name=name)
                    )
                    continue
                n_fallback += 1  # masked scoring needs a substitution pair
            preds.append(score_pair_lm(model, inst, model_name=name))
        return schemas.ScoreResponse(
            jsonl=_jsonl(preds), n=len(preds), n_fallback=n_fallback
        )

    @app.post("/score/options", response_model=schemas.ScoreResponse)
    def score_options(req: schemas.ScoreOptionsRequest) -> schemas.ScoreResponse:
        model = _load_model(req.model_json)
        dataset = parse_task_b_csv(req.data_csv)
        name = req.model_name or "ngram"
        preds = [score_options_concat(model, inst, model_name=name) for inst in dataset]
        return schemas.ScoreResponse(jsonl=_jsonl(preds), n=len(preds))

    @app.post(
        "/predictions/validate", response_model=schemas.ValidatePredictionsResponse
    )
    def validate_predictions(
        req: schemas.ValidatePredictionsRequest,
    ) -> schemas.ValidatePredictionsResponse:
        dataset = _parse_dataset(req.task, req.data_csv)
        preds = parse_prediction_lines(
            req.jsonl.splitlines(), dataset.task, dataset.ids()
        )
        return schemas.ValidatePredictionsResponse(
            n=len(preds), models=sorted({p.model for p in preds})
        )

    @app.post("/ensemble/run", response_model=schemas.EnsembleResponse)
    def run_ensemble_endpoint(req: schemas.EnsembleRequest) -> schemas.EnsembleResponse:
        dataset = _parse_dataset(req.task, req.data_csv)
        infos, member_preds = _member_inputs(dataset.task, dataset.ids(), req.members)
        if len(infos) == 1 and infos[0].dev_score is None:
            # a single member needs no dev score: its weight is 1 either way
            infos = [ModelInfo(name=infos[0].name, dev_score=1.0)]
        config = _ensemble_config(infos, req.threshold, tuple(req.band))
        outputs = combine_predictions(dataset.task, dataset.ids(), member_preds, config)

        labeled = Dataset(
            task=dataset.task,
            split=dataset.split,
            instances=tuple(
                replace(inst, label=out.hard_label)
                for inst, out in zip(dataset, outputs)
            ),
        )
        _, labels_csv = dataset_to_csv(labeled)
        assert labels_csv is not None
        n_ambiguous = (
            sum(1 for out in outputs if out.ambiguous)
            if dataset.task == TASK_A
            else None
        )
        return schemas.EnsembleResponse(
            jsonl=_jsonl(out.to_soft_prediction() for out in outputs),
            labels_csv=labels_csv,
            weights=list(config.weights),
            n_ambiguous=n_ambiguous,
        )

    @app.post("/eval/report", response_model=schemas.ReportResponse)
    def eval_report(req: schemas.EvalRequest) -> schemas.ReportResponse:
        dataset = _parse_dataset(req.task, req.data_csv, req.answers_csv)
        gold = dataset.labels()
        preds = parse_prediction_lines(
            req.predictions_jsonl.splitlines(), dataset.task, dataset.ids()
        )
        config = EnsembleConfig(
            members=(ModelInfo(name="predictions", dev_score=1.0),),
            weights=(1.0,),
            threshold=req.threshold,
            ambiguity_band=tuple(req.band),
        )
        hard = harden_predictions(preds, config)
        overall = accuracy(hard, gold)
        n_ambiguous = 0
        if dataset.task == TASK_A:
            lo, hi = config.ambiguity_band
            n_ambiguous = sum(1 for p in preds if lo <= p.scalar <= hi)

        per_type = None
        per_counts = None
        if req.with_types and dataset.task == TASK_A:
            types = {inst.id: classify_instance(inst).kind for inst in dataset}
            per_type = per_type_accuracy(hard, gold, types)
            per_counts = {
                kind: sum(1 for k in types.values() if k is kind)
                for kind in SampleKind
                if kind in per_type
            }

        agreement_fraction = None
        if req.members:
            _, member_preds = _member_inputs(dataset.task, dataset.ids(), req.members)
            member_hard = {
                member.name: harden_predictions(mp, config)
                for member, mp in zip(req.members, member_preds)
            }
            member_hard["<evaluated>"] = hard
            agreement_fraction, _ = agreement(member_hard)

        report = EvalReport(
            task=dataset.task,
            overall_accuracy=overall,
            n_instances=len(dataset),
            n_ambiguous=n_ambiguous,
            per_type_accuracy=per_type,
            per_type_counts=per_counts,
            agreement_fraction=agreement_fraction,
        )
        text, doc = render_report(report)
        return schemas.ReportResponse(text=text, report=doc)

    @app.post("/analysis/ambiguity", response_model=schemas.ReportResponse)
    def analyze_ambiguity(req: schemas.AmbiguityRequest) -> schemas.ReportResponse:
        dataset = _parse_dataset(req.task, req.data_csv, req.answers_csv)
        gold = dataset.labels()
        infos, member_preds = _member_inputs(dataset.task, dataset.ids(), req.members)
        config = _ensemble_config(infos, req.threshold, tuple(req.band))
        outputs = combine_predictions(dataset.task, dataset.ids(), member_preds, config)
        member_hard = {
            info.name: harden_predictions(mp, config)
            for info, mp in zip(infos, member_preds)
        }
        table = ambiguity_replacement(outputs, member_hard, gold)
        ensemble_hard = {out.instance_id: out.hard_label for out in outputs}
        agreement_fraction, _ = agreement(member_hard)
        report = EvalReport(
            task=dataset.task,
            overall_accuracy=accuracy(ensemble_hard, gold),
            n_instances=len(dataset),
            n_ambiguous=len(table.ambiguous_ids),
            agreement_fraction=agreement_fraction,
        )
        text, doc = render_report(report, table)
        return schemas.ReportResponse(text=text, report=doc)

    return app
