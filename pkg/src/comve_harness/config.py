"""Run configuration: a flat key-value file overridable by CLI flags.

Grammar (one assignment per line)::

    # comment lines and blank lines are ignored
    key = value
    member.<i>.field = value

Recognized keys: ``task`` (A|B), ``data``, ``answers``, ``corpus``,
``predictions``, ``out``, ``labels_out``, ``json_out`` (paths),
``order`` (int >= 1), ``alpha`` (float > 0), ``threshold`` (float),
``band`` (``lo,hi``), ``seed`` (int), ``model_name``, ``method``
(pair|masked), ``split``, and per-member blocks ``member.<i>.name``,
``member.<i>.dev_score``, ``member.<i>.predictions``. Members are
ordered by their index. Relative paths inside a config file resolve
against the file's directory; flag values win over file values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .errors import ValidationError

_MEMBER_RE = re.compile(r"^member\.(\d+)\.(name|dev_score|predictions)$")
_PATH_KEYS = {
    "data",
    "answers",
    "corpus",
    "predictions",
    "model",
    "out",
    "labels_out",
    "json_out",
}
_SCALAR_KEYS = _PATH_KEYS | {
    "task",
    "order",
    "alpha",
    "threshold",
    "band",
    "seed",
    "model_name",
    "method",
    "split",
}


@dataclass(frozen=True)
class MemberSpec:
    """One ensemble member as configured: identity, dev score, and the
    prediction file it contributes."""

    name: str
    dev_score: Optional[float] = None
    predictions: Optional[Path] = None


@dataclass(frozen=True)
class RunConfig:
    """Everything one subcommand invocation may need."""

    task: Optional[str] = None
    data: Optional[Path] = None
    answers: Optional[Path] = None
    corpus: Optional[Path] = None
    predictions: Optional[Path] = None
    model: Optional[Path] = None
    out: Optional[Path] = None
    labels_out: Optional[Path] = None
    json_out: Optional[Path] = None
    order: int = 3
    alpha: float = 0.1
    threshold: float = 0.5
    band: tuple[float, float] = (0.4, 0.6)
    seed: int = 0
    model_name: Optional[str] = None
    method: str = "pair"
    split: Optional[str] = None
    members: tuple[MemberSpec, ...] = field(default_factory=tuple)


def parse_config_text(text: str, base_dir: Optional[Path] = None) -> dict:
    """Parse the flat grammar into a raw key -> value dict (members
    nested under 'members')."""
    values: dict = {}
    members: dict[int, dict[str, str]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(
                f"config line {line_no}: expected 'key = value', got {raw!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        match = _MEMBER_RE.match(key)
        if match:
            idx = int(match.group(1))
            block = members.setdefault(idx, {})
            if match.group(2) in block:
                raise ValidationError(
                    f"config line {line_no}: duplicate key {key!r}"
                )
            block[match.group(2)] = value
            continue
        if key not in _SCALAR_KEYS:
            raise ValidationError(f"config line {line_no}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"config line {line_no}: duplicate key {key!r}")
        values[key] = value
    if members:
        values["members"] = [members[i] for i in sorted(members)]
    if base_dir is not None:
        for key in _PATH_KEYS & values.keys():
            values[key] = str(_resolve(base_dir, values[key]))
        for block in values.get("members", []):
            if "predictions" in block:
                block["predictions"] = str(_resolve(base_dir, block["predictions"]))
    return values


def _resolve(base_dir: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base_dir / path


def load_config_file(path: Path) -> dict:
    """Read a config file; relative paths resolve against its directory."""
    return parse_config_text(
        Path(path).read_text(encoding="utf-8"), base_dir=Path(path).parent
    )


def parse_band(value: str) -> tuple[float, float]:
    parts = value.split(",")
    if len(parts) != 2:
        raise ValidationError(f"band must be 'lo,hi', got {value!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ValidationError(f"band must be two floats, got {value!r}") from None


def build_run_config(file_values: Optional[dict], overrides: dict) -> RunConfig:
    """Merge config-file values with flag overrides (flags win)."""
    merged: dict = dict(file_values or {})
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value

    config = RunConfig()
    casts = {
        "order": int,
        "alpha": float,
        "threshold": float,
        "seed": int,
    }
    for key, value in merged.items():
        if key == "members":
            member_specs = []
            for i, block in enumerate(value, start=1):
                if "name" not in block:
                    raise ValidationError(f"member {i}: missing name")
                dev_score = block.get("dev_score")
                predictions = block.get("predictions")
                try:
                    dev_score = float(dev_score) if dev_score is not None else None
                except ValueError:
                    raise ValidationError(
                        f"member {block['name']}: dev_score {dev_score!r} "
                        "is not a number"
                    ) from None
                member_specs.append(
                    MemberSpec(
                        name=block["name"],
                        dev_score=dev_score,
                        predictions=Path(predictions) if predictions else None,
                    )
                )
            config = replace(config, members=tuple(member_specs))
        elif key == "band":
            band = parse_band(value) if isinstance(value, str) else tuple(value)
            config = replace(config, band=band)
        elif key in _PATH_KEYS:
            config = replace(config, **{key: Path(value)})
        elif key in casts:
            try:
                config = replace(config, **{key: casts[key](value)})
            except ValueError:
                raise ValidationError(
                    f"config key {key}: {value!r} is not a valid value"
                ) from None
        elif key in ("task", "model_name", "method", "split"):
            config = replace(config, **{key: value})
        else:
            raise ValidationError(f"unknown config key {key!r}")
    return config


def validate_run_config(
    config: RunConfig, require: Sequence[str] = (), check_files: bool = True
) -> list[str]:
    """Collect every violation at once; an empty list means the config
    is usable for the requesting subcommand.

    ``check_files=False`` skips the existence checks for callers that
    treat unreadable files as I/O errors at open time instead.
    """
    errors: list[str] = []
    for name in require:
        if name == "members":
            if not config.members:
                errors.append("at least one member.<i>.* block is required")
        elif getattr(config, name) is None:
            errors.append(f"missing required setting '{name}'")

    if config.task is not None and config.task not in ("A", "B"):
        errors.append(f"task must be A or B, got {config.task!r}")
    if config.order < 1:
        errors.append(f"order must be >= 1, got {config.order}")
    if not config.alpha > 0:
        errors.append(f"alpha must be positive, got {config.alpha}")
    lo, hi = config.band
    if lo > hi:
        errors.append(f"ambiguity band lower {lo} exceeds upper {hi}")
    elif not lo <= config.threshold <= hi:
        errors.append(
            f"threshold {config.threshold} must lie inside the band [{lo}, {hi}]"
        )
    if config.method not in ("pair", "masked"):
        errors.append(f"method must be 'pair' or 'masked', got {config.method!r}")

    for member in config.members:
        if member.dev_score is not None and member.dev_score <= 0:
            errors.append(
                f"member {member.name}: dev_score must be positive, "
                f"got {member.dev_score}"
            )
    names = [m.name for m in config.members]
    if len(names) != len(set(names)):
        errors.append("member names must be unique")

    if check_files:
        for name in ("data", "answers", "corpus", "predictions", "model"):
            path = getattr(config, name)
            if path is not None and not Path(path).is_file():
                errors.append(f"{name} file does not exist: {path}")
        for member in config.members:
            if member.predictions is not None and not member.predictions.is_file():
                errors.append(
                    f"member {member.name}: predictions file does not exist: "
                    f"{member.predictions}"
                )
    return errors
