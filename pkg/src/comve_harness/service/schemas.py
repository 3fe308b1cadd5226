"""Request/response bodies for the HTTP service.

File-shaped payloads (CSV, JSONL, serialized models) travel as raw
text so that clients stay thin: they read files, post the contents,
and write the returned text back to disk.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Task = Literal["A", "B"]


class HealthResponse(BaseModel):
    status: str
    version: str


class ParseDatasetRequest(BaseModel):
    data_csv: str
    answers_csv: Optional[str] = None
    split: Optional[str] = None


class InstanceAModel(BaseModel):
    id: int = Field(ge=0)
    sent0: str
    sent1: str
    label: Optional[int] = None


class InstanceBModel(BaseModel):
    id: int = Field(ge=0)
    false_statement: str
    options: tuple[str, str, str]
    label: Optional[int] = None


class ParseTaskAResponse(BaseModel):
    task: Literal["A"] = "A"
    split: str
    n_instances: int
    labeled: bool
    label_balance: Optional[dict[int, int]] = None
    instances: list[InstanceAModel]


class ParseTaskBResponse(BaseModel):
    task: Literal["B"] = "B"
    split: str
    n_instances: int
    labeled: bool
    label_balance: Optional[dict[int, int]] = None
    instances: list[InstanceBModel]


class ClassifyRequest(BaseModel):
    data_csv: str


class TypeAssignmentModel(BaseModel):
    id: int
    kind: str
    position: Optional[int] = None
    tokens: Optional[tuple[str, str]] = None
    permutation: Optional[list[int]] = None
    degenerate: bool = False


class ClassifyResponse(BaseModel):
    assignments: list[TypeAssignmentModel]
    distribution: dict[str, int]
    csv: str


class TrainLmRequest(BaseModel):
    corpus_text: str
    order: int = 3
    alpha: float = 0.1


class TrainLmResponse(BaseModel):
    model_json: str
    order: int
    alpha: float
    vocab_size: int
    n_contexts: int
    n_sentences: int


class ScorePairsRequest(BaseModel):
    model_json: str
    data_csv: str
    method: Literal["pair", "masked"] = "pair"
    model_name: Optional[str] = None


class ScoreOptionsRequest(BaseModel):
    model_json: str
    data_csv: str
    model_name: Optional[str] = None


class ScoreResponse(BaseModel):
    jsonl: str
    n: int
    n_fallback: int = 0


class ValidatePredictionsRequest(BaseModel):
    task: Task
    data_csv: str
    jsonl: str


class ValidatePredictionsResponse(BaseModel):
    n: int
    models: list[str]


class MemberPayload(BaseModel):
    name: str
    dev_score: Optional[float] = None
    jsonl: str


class EnsembleRequest(BaseModel):
    task: Task
    data_csv: str
    members: list[MemberPayload]
    threshold: float = 0.5
    band: tuple[float, float] = (0.4, 0.6)


class EnsembleResponse(BaseModel):
    jsonl: str
    labels_csv: str
    weights: list[float]
    n_ambiguous: Optional[int] = None


class EvalRequest(BaseModel):
    task: Task
    data_csv: str
    answers_csv: str
    predictions_jsonl: str
    members: list[MemberPayload] = []
    with_types: bool = True
    threshold: float = 0.5
    band: tuple[float, float] = (0.4, 0.6)


class ReportResponse(BaseModel):
    text: str
    report: dict


class AmbiguityRequest(BaseModel):
    task: Literal["A"] = "A"
    data_csv: str
    answers_csv: str
    members: list[MemberPayload]
    threshold: float = 0.5
    band: tuple[float, float] = (0.4, 0.6)
