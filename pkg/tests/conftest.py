"""Shared test fixtures: committed files and a tiny trained model."""

from __future__ import annotations

from pathlib import Path

import pytest

from comve_harness import Dataset, load_task_a, tokenize, train_ngram

TESTS_DIR = Path(__file__).resolve().parent
FIXTURES = TESTS_DIR / "fixtures"
SYNTH = TESTS_DIR.parent / "data" / "synth"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def synth_dir() -> Path:
    return SYNTH


@pytest.fixture(scope="session")
def trio_dataset() -> Dataset:
    return load_task_a(
        FIXTURES / "structure_trio_data.csv", FIXTURES / "structure_trio_answers.csv"
    )


@pytest.fixture(scope="session")
def sanity_corpus() -> list[tuple[str, ...]]:
    lines = (FIXTURES / "corpus_200.txt").read_text(encoding="utf-8").splitlines()
    return [tokenize(line) for line in lines if line.strip()]


@pytest.fixture(scope="session")
def sanity_pairs() -> Dataset:
    return load_task_a(
        FIXTURES / "sanity_pairs_data.csv", FIXTURES / "sanity_pairs_answers.csv"
    )


@pytest.fixture(scope="session")
def tiny_model():
    corpus = [
        tokenize("the chef cooked the soup in the kitchen"),
        tokenize("the chef cooked the rice in the kitchen"),
        tokenize("the farmer planted the tree in the garden"),
        tokenize("the teacher read the book every morning"),
        tokenize("the doctor drank the coffee every morning"),
    ]
    return train_ngram(corpus, n=3, alpha=0.1)
