"""Structural classification of task-A sentence pairs.

Every pair falls into exactly one of three kinds:

* ``TypeA``: same length, exactly one position differs (a single-token
  substitution such as a swapped entity, number or action);
* ``TypeB``: same token multiset in a different order (word-order
  shuffles that flip the meaning);
* ``TypeC``: everything else (no usable surface structure).

Kinds are mutually exclusive and total; classification is symmetric in
its two arguments.
"""

from __future__ import annotations

import string
import warnings
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .data import TASK_A, Dataset, InstanceA
from .errors import ValidationError

TokenSeq = tuple[str, ...]

_STRIP_CHARS = string.punctuation


class SampleKind(str, Enum):
    """Wire labels for the three structural kinds."""

    SINGLE_SUBSTITUTION = "TypeA"
    REORDERED = "TypeB"
    UNSTRUCTURED = "TypeC"


class DegeneratePairWarning(UserWarning):
    """Raised (as a warning) when both sentences tokenize identically."""


@dataclass(frozen=True)
class SampleType:
    """Classification verdict plus the evidence backing it.

    For a substitution the evidence is the differing position and the
    two tokens at it; for a reorder it is a position map ``perm`` with
    ``a[i] == b[perm[i]]`` built greedily (first unused match), which
    displaces at least one token whenever the sequences differ.
    """

    kind: SampleKind
    position: Optional[int] = None
    tokens: Optional[tuple[str, str]] = None
    permutation: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.kind is SampleKind.SINGLE_SUBSTITUTION:
            if self.position is None or self.tokens is None:
                raise ValidationError("substitution verdict requires position and tokens")
            if self.tokens[0] == self.tokens[1]:
                raise ValidationError("substitution tokens must differ")
        elif self.kind is SampleKind.REORDERED:
            if self.permutation is None:
                raise ValidationError("reorder verdict requires a permutation witness")
            if sorted(self.permutation) != list(range(len(self.permutation))):
                raise ValidationError("permutation witness must be a bijection")
            if all(i == j for i, j in enumerate(self.permutation)):
                raise ValidationError("permutation witness must displace a token")


def tokenize(text: str) -> TokenSeq:
    """Lowercase, whitespace-split, strip surrounding ASCII punctuation.

    Chunks that are pure punctuation vanish; a text with no surviving
    tokens is rejected.
    """
    tokens = tuple(
        stripped
        for chunk in text.lower().split()
        if (stripped := chunk.strip(_STRIP_CHARS))
    )
    if not tokens:
        raise ValidationError(f"text {text!r} has no tokens after normalization")
    return tokens


def _match_permutation(a: TokenSeq, b: TokenSeq) -> tuple[int, ...]:
    """Greedy bijection a-position -> b-position over equal multisets."""
    positions: dict[str, list[int]] = {}
    for j in range(len(b) - 1, -1, -1):
        positions.setdefault(b[j], []).append(j)
    return tuple(positions[tok].pop() for tok in a)


def classify_pair(a: TokenSeq, b: TokenSeq) -> SampleType:
    """Assign one kind to a token-sequence pair.

    Identical sequences are degenerate data; they come back as
    ``TypeC`` with a DegeneratePairWarning rather than a fourth kind.
    """
    if not a or not b:
        raise ValidationError("classify_pair requires non-empty token sequences")
    if a == b:
        warnings.warn(
            f"identical sentence pair {' '.join(a)!r}", DegeneratePairWarning
        )
        return SampleType(kind=SampleKind.UNSTRUCTURED)
    if len(a) == len(b):
        diffs = [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
        if len(diffs) == 1:
            k = diffs[0]
            return SampleType(
                kind=SampleKind.SINGLE_SUBSTITUTION, position=k, tokens=(a[k], b[k])
            )
    if Counter(a) == Counter(b):
        return SampleType(
            kind=SampleKind.REORDERED, permutation=_match_permutation(a, b)
        )
    return SampleType(kind=SampleKind.UNSTRUCTURED)


def classify_instance(inst: InstanceA) -> SampleType:
    """Tokenize and classify one task-A instance."""
    return classify_pair(tokenize(inst.sent0), tokenize(inst.sent1))


def type_distribution(dataset: Dataset) -> dict[SampleKind, int]:
    """Counts per kind over a task-A dataset (zeros included)."""
    if dataset.task != TASK_A:
        raise ValidationError("type_distribution requires a task A dataset")
    counts = {kind: 0 for kind in SampleKind}
    for inst in dataset.instances:
        counts[classify_instance(inst).kind] += 1
    return counts
