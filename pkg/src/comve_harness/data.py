"""ComVE dataset model and CSV ingestion.

Two tasks are supported. Task A rows are sentence pairs where one
sentence goes against common sense; task B rows are a nonsensical
statement plus three candidate explanations. Data files carry a header
(``id,sent0,sent1`` or ``id,FalseSent,OptionA,OptionB,OptionC``);
answer files are headerless ``id,label`` rows (an optional literal
``id,label`` header is tolerated). Everything is UTF-8; LF and CRLF
line endings both parse.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

from .errors import ValidationError

TASK_A = "A"
TASK_B = "B"

_HEADER_A = ["id", "sent0", "sent1"]
_HEADER_B = ["id", "FalseSent", "OptionA", "OptionB", "OptionC"]
_LETTERS = ("A", "B", "C")


@dataclass(frozen=True)
class InstanceA:
    """One task-A sample: a sentence pair, label = index of the
    against-common-sense sentence (0 or 1), absent on test splits."""

    id: int
    sent0: str
    sent1: str
    label: Optional[int] = None

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValidationError(f"instance id must be non-negative, got {self.id}")
        if not self.sent0.strip() or not self.sent1.strip():
            raise ValidationError(f"instance {self.id}: sentences must be non-empty")
        if self.label is not None and self.label not in (0, 1):
            raise ValidationError(
                f"instance {self.id}: task A label must be 0 or 1, got {self.label!r}"
            )


@dataclass(frozen=True)
class InstanceB:
    """One task-B sample: a false statement plus exactly three candidate
    explanations, label = index of the correct explanation."""

    id: int
    false_statement: str
    options: tuple[str, str, str]
    label: Optional[int] = None

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValidationError(f"instance id must be non-negative, got {self.id}")
        if not self.false_statement.strip():
            raise ValidationError(f"instance {self.id}: statement must be non-empty")
        if len(self.options) != 3:
            raise ValidationError(
                f"instance {self.id}: exactly 3 options required, got {len(self.options)}"
            )
        if any(not opt.strip() for opt in self.options):
            raise ValidationError(f"instance {self.id}: options must be non-empty")
        if self.label is not None and self.label not in (0, 1, 2):
            raise ValidationError(
                f"instance {self.id}: task B label must be 0, 1 or 2, got {self.label!r}"
            )


Instance = Union[InstanceA, InstanceB]


@dataclass(frozen=True)
class Dataset:
    """An ordered, id-unique collection of instances for one task/split.

    Immutable after construction; either every instance is labeled or
    none are (the latter is the test-split case).
    """

    task: str
    split: str
    instances: tuple[Instance, ...]

    def __post_init__(self) -> None:
        if self.task not in (TASK_A, TASK_B):
            raise ValidationError(f"task must be 'A' or 'B', got {self.task!r}")
        expected = InstanceA if self.task == TASK_A else InstanceB
        seen: set[int] = set()
        labeled = 0
        for inst in self.instances:
            if not isinstance(inst, expected):
                raise ValidationError(
                    f"instance {inst.id} does not match task {self.task}"
                )
            if inst.id in seen:
                raise ValidationError(f"duplicate instance id {inst.id}")
            seen.add(inst.id)
            if inst.label is not None:
                labeled += 1
        if labeled not in (0, len(self.instances)):
            raise ValidationError(
                f"mixed labeling: {labeled} of {len(self.instances)} instances "
                "carry labels (must be all or none)"
            )

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    @property
    def labeled(self) -> bool:
        return bool(self.instances) and self.instances[0].label is not None

    def ids(self) -> tuple[int, ...]:
        return tuple(inst.id for inst in self.instances)

    def labels(self) -> dict[int, int]:
        """id -> gold label; raises if the dataset is unlabeled."""
        if not self.labeled:
            raise ValidationError("dataset carries no labels")
        return {inst.id: inst.label for inst in self.instances}  # type: ignore[misc]


@dataclass(frozen=True)
class ModelInfo:
    """Identity and size metadata for one member model.

    The four size fields describe transformer geometry (encoder layers,
    hidden width, token-embedding width, attention heads); all are
    optional annotations. ``dev_score`` is the accuracy on the
    development split and is what the ensemble derives weights from.
    """

    name: str
    family: str = ""
    layers: Optional[int] = None
    hidden_size: Optional[int] = None
    embedding_size: Optional[int] = None
    attention_heads: Optional[int] = None
    dev_score: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("model name must be non-empty")
        if self.dev_score is not None and not 0.0 <= self.dev_score <= 1.0:
            raise ValidationError(
                f"model {self.name}: dev_score must lie in [0, 1], got {self.dev_score}"
            )


def _rows_from_text(text: str) -> list[tuple[int, list[str]]]:
    """Non-empty CSV rows as (1-based row number, fields)."""
    reader = csv.reader(io.StringIO(text, newline=""))
    return [(i, row) for i, row in enumerate(reader, start=1) if row]


def _rows_from_file(path: Path) -> list[tuple[int, list[str]]]:
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        return _rows_from_text(fh.read())


def _parse_id(field: str, source: str, row_no: int) -> int:
    try:
        value = int(field.strip())
    except ValueError:
        raise ValidationError(
            f"{source}: row {row_no}: id {field!r} is not an integer"
        ) from None
    if value < 0:
        raise ValidationError(f"{source}: row {row_no}: id must be non-negative")
    return value


def _parse_answers(
    rows: list[tuple[int, list[str]]], task: str, source: str
) -> dict[int, int]:
    """Answer rows as id -> label index. Task A labels are 0/1, task B
    labels are letters A/B/C (case-insensitive) mapped to 0/1/2."""
    answers: dict[int, int] = {}
    for row_no, row in rows:
        if row_no == 1 and [f.strip().lower() for f in row] == ["id", "label"]:
            continue  # optional header row
        if len(row) != 2:
            raise ValidationError(
                f"{source}: row {row_no}: expected 2 fields (id,label), got {len(row)}"
            )
        ans_id = _parse_id(row[0], source, row_no)
        raw = row[1].strip()
        if task == TASK_A:
            if raw not in ("0", "1"):
                raise ValidationError(
                    f"{source}: row {row_no}: task A label must be 0 or 1, got {raw!r}"
                )
            label = int(raw)
        else:
            letter = raw.upper()
            if letter not in _LETTERS:
                raise ValidationError(
                    f"{source}: row {row_no}: task B label must be one of A/B/C, got {raw!r}"
                )
            label = _LETTERS.index(letter)
        if ans_id in answers:
            raise ValidationError(f"{source}: row {row_no}: duplicate answer id {ans_id}")
        answers[ans_id] = label
    return answers


def _join_labels(
    ids: Sequence[int], answers: dict[int, int], data_source: str, answers_source: str
) -> None:
    """Coverage check before joining: the answer ids must equal the data ids."""
    data_ids = set(ids)
    missing = data_ids - answers.keys()
    extra = answers.keys() - data_ids
    if extra:
        raise ValidationError(
            f"{answers_source}: answer ids {sorted(extra)[:5]} have no matching "
            f"row in {data_source}"
        )
    if missing:
        raise ValidationError(
            f"{answers_source}: no answer for ids {sorted(missing)[:5]} of {data_source}"
        )


def _parse_dataset(
    task: str,
    data_rows: list[tuple[int, list[str]]],
    answer_rows: Optional[list[tuple[int, list[str]]]],
    split: Optional[str],
    data_source: str,
    answers_source: str,
) -> Dataset:
    if not data_rows:
        raise ValidationError(f"{data_source}: file is empty")
    header = _HEADER_A if task == TASK_A else _HEADER_B
    if [f.strip() for f in data_rows[0][1]] != header:
        raise ValidationError(
            f"{data_source}: row 1: expected header {','.join(header)!r}, "
            f"got {','.join(data_rows[0][1])!r}"
        )
    answers = (
        _parse_answers(answer_rows, task, answers_source)
        if answer_rows is not None
        else None
    )

    n_fields = len(header)
    instances: list[Instance] = []
    for row_no, row in data_rows[1:]:
        if len(row) != n_fields:
            raise ValidationError(
                f"{data_source}: row {row_no}: expected {n_fields} fields "
                f"({','.join(header)}), got {len(row)}"
            )
        inst_id = _parse_id(row[0], data_source, row_no)
        label = answers.get(inst_id) if answers else None
        try:
            if task == TASK_A:
                instances.append(
                    InstanceA(id=inst_id, sent0=row[1], sent1=row[2], label=label)
                )
            else:
                instances.append(
                    InstanceB(
                        id=inst_id,
                        false_statement=row[1],
                        options=(row[2], row[3], row[4]),
                        label=label,
                    )
                )
        except ValidationError as exc:
            raise ValidationError(f"{data_source}: row {row_no}: {exc}") from None
    if answers is not None:
        _join_labels(
            [i.id for i in instances], answers, data_source, answers_source
        )
    if split is None:
        split = "test" if answers is None else "train"
    try:
        return Dataset(task=task, split=split, instances=tuple(instances))
    except ValidationError as exc:
        raise ValidationError(f"{data_source}: {exc}") from None


def load_task_a(
    data_file: Union[str, Path],
    answers_file: Union[str, Path, None] = None,
    split: Optional[str] = None,
) -> Dataset:
    """Load a task-A CSV, optionally joining labels from an answer file.

    The join is by id and must be total in both directions. ``split``
    defaults to "test" when no answer file is given, "train" otherwise.
    """
    return _load(TASK_A, data_file, answers_file, split)


def load_task_b(
    data_file: Union[str, Path],
    answers_file: Union[str, Path, None] = None,
    split: Optional[str] = None,
) -> Dataset:
    """Load a task-B CSV (statement + 3 options); answer letters A/B/C
    map to option indices 0/1/2."""
    return _load(TASK_B, data_file, answers_file, split)


def _load(
    task: str,
    data_file: Union[str, Path],
    answers_file: Union[str, Path, None],
    split: Optional[str],
) -> Dataset:
    data_file = Path(data_file)
    data_rows = _rows_from_file(data_file)
    answer_rows = None
    answers_source = ""
    if answers_file is not None:
        answers_file = Path(answers_file)
        answer_rows = _rows_from_file(answers_file)
        answers_source = str(answers_file)
    return _parse_dataset(
        task, data_rows, answer_rows, split, str(data_file), answers_source
    )


def parse_task_a_csv(
    data_csv: str, answers_csv: Optional[str] = None, split: Optional[str] = None
) -> Dataset:
    """In-memory variant of load_task_a operating on CSV text."""
    return _parse_text(TASK_A, data_csv, answers_csv, split)


def parse_task_b_csv(
    data_csv: str, answers_csv: Optional[str] = None, split: Optional[str] = None
) -> Dataset:
    """In-memory variant of load_task_b operating on CSV text."""
    return _parse_text(TASK_B, data_csv, answers_csv, split)


def _parse_text(
    task: str, data_csv: str, answers_csv: Optional[str], split: Optional[str]
) -> Dataset:
    answer_rows = _rows_from_text(answers_csv) if answers_csv is not None else None
    return _parse_dataset(
        task, _rows_from_text(data_csv), answer_rows, split, "<data>", "<answers>"
    )


def label_balance(dataset: Dataset) -> dict[int, int]:
    """Histogram of gold labels; the dataset must be fully labeled."""
    if dataset.instances and not dataset.labeled:
        raise ValidationError("label_balance requires a labeled dataset")
    counts = Counter(inst.label for inst in dataset.instances)
    return {label: counts[label] for label in sorted(counts)}


def write_task_a(
    dataset: Dataset,
    data_file: Union[str, Path],
    answers_file: Union[str, Path, None] = None,
) -> None:
    """Write a task-A dataset back to the CSV formats it was loaded from."""
    if dataset.task != TASK_A:
        raise ValidationError("write_task_a requires a task A dataset")
    _write(dataset, data_file, answers_file)


def write_task_b(
    dataset: Dataset,
    data_file: Union[str, Path],
    answers_file: Union[str, Path, None] = None,
) -> None:
    """Write a task-B dataset back to the CSV formats it was loaded from."""
    if dataset.task != TASK_B:
        raise ValidationError("write_task_b requires a task B dataset")
    _write(dataset, data_file, answers_file)


def _write(
    dataset: Dataset,
    data_file: Union[str, Path],
    answers_file: Union[str, Path, None],
) -> None:
    data_csv, answers_csv = dataset_to_csv(dataset)
    Path(data_file).write_text(data_csv, encoding="utf-8")
    if answers_file is not None:
        if answers_csv is None:
            raise ValidationError("cannot write answers for an unlabeled dataset")
        Path(answers_file).write_text(answers_csv, encoding="utf-8")


def dataset_to_csv(dataset: Dataset) -> tuple[str, Optional[str]]:
    """Dataset as (data_csv, answers_csv) text, answers None if unlabeled."""
    data_buf = io.StringIO()
    writer = csv.writer(data_buf, lineterminator="\n")
    if dataset.task == TASK_A:
        writer.writerow(_HEADER_A)
        for inst in dataset.instances:
            writer.writerow([inst.id, inst.sent0, inst.sent1])
    else:
        writer.writerow(_HEADER_B)
        for inst in dataset.instances:
            writer.writerow([inst.id, inst.false_statement, *inst.options])
    answers_text = None
    if dataset.labeled:
        ans_buf = io.StringIO()
        ans_writer = csv.writer(ans_buf, lineterminator="\n")
        for inst in dataset.instances:
            label = inst.label if dataset.task == TASK_A else _LETTERS[inst.label]
            ans_writer.writerow([inst.id, label])
        answers_text = ans_buf.getvalue()
    return data_buf.getvalue(), answers_text
