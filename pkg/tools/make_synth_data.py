#!/usr/bin/env python3
"""Regenerate the committed synthetic datasets and test fixtures.

Everything here is deterministic: a fixed seed drives a small template
world of sensible sentences (agent, verb, object, tail) plus three
corruption operators matching the structural kinds (single-token
substitution, agent/object reorder, unrelated replacement). Outputs:

    data/synth/taskA_{train,dev,test}_{data,answers}.csv
    data/synth/taskB_{train,dev,test}_{data,answers}.csv
    data/synth/corpus.txt
    tests/fixtures/corpus_200.txt
    tests/fixtures/sanity_pairs_{data,answers}.csv

The script asserts the structural kind of every generated pair and the
n-gram scorer's accuracy on the sanity pairs before writing anything.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

from comve_harness import (
    Dataset,
    InstanceA,
    InstanceB,
    SampleKind,
    classify_pair,
    score_pair_lm,
    tokenize,
    train_ngram,
    write_task_a,
    write_task_b,
)

SEED = 20200404
ROOT = Path(__file__).resolve().parent.parent

AGENTS = [
    "chef", "teacher", "farmer", "doctor", "painter",
    "student", "baker", "nurse", "pilot", "gardener",
]

# verb -> plausible single-token objects
WORLD = {
    "cooked": ["soup", "rice", "pasta", "stew", "dinner"],
    "ate": ["bread", "apples", "pancakes", "cheese", "porridge"],
    "drank": ["water", "tea", "coffee", "juice", "milk"],
    "read": ["book", "newspaper", "letter", "novel", "recipe"],
    "washed": ["dishes", "clothes", "windows", "floor", "blanket"],
    "planted": ["tree", "flowers", "seeds", "tomatoes", "roses"],
    "painted": ["fence", "wall", "portrait", "door", "landscape"],
    "repaired": ["bicycle", "roof", "clock", "radio", "chair"],
    "folded": ["towels", "napkins", "shirts", "blanket", "map"],
    "carried": ["basket", "ladder", "suitcase", "bucket", "firewood"],
}

VERB_BASE = {
    "cooked": "cook", "ate": "eat", "drank": "drink", "read": "read",
    "washed": "wash", "planted": "plant", "painted": "paint",
    "repaired": "repair", "folded": "fold", "carried": "carry",
}

TAILS = [
    "in the kitchen", "after lunch", "every morning", "at the market",
    "with great care", "before sunset", "in the garden", "near the river",
    "on the weekend", "during the afternoon",
]

# never plausible as an object of any verb above and absent from the
# sensible corpus, so the scorer sees them as unknown tokens
IMPLAUSIBLE = [
    "thunder", "algebra", "gravity", "silence", "tuesday",
    "honesty", "geometry", "whisper", "danger", "twilight",
]

_PLAUSIBLE_OBJECTS = {obj for objects in WORLD.values() for obj in objects}


def sensible(rng: random.Random) -> tuple[str, str, str, str]:
    verb = rng.choice(sorted(WORLD))
    return rng.choice(AGENTS), verb, rng.choice(WORLD[verb]), rng.choice(TAILS)


def render(agent: str, verb: str, obj: str, tail: str) -> str:
    return f"The {agent} {verb} the {obj} {tail}."


def corrupt_substitution(rng, agent, verb, obj, tail) -> str:
    """Replace the object (or the agent) with a never-plausible noun."""
    bad = rng.choice(IMPLAUSIBLE)
    if rng.random() < 0.3:
        return render(bad, verb, obj, tail)
    return render(agent, verb, bad, tail)


def corrupt_reorder(agent, verb, obj, tail) -> str:
    """Swap agent and object: same tokens, nonsensical order."""
    return render(obj, verb, agent, tail)


def corrupt_unrelated(rng, verb) -> str:
    """A structurally different nonsense sentence."""
    first, second = rng.sample(IMPLAUSIBLE, 2)
    other_verb = rng.choice(sorted(set(WORLD) - {verb}))
    return f"The {first} {other_verb} quietly beside the sleeping {second}."


def make_pair(rng: random.Random, kind: SampleKind) -> tuple[str, str, int, str]:
    """(sent0, sent1, label, sensible side); label indexes the nonsense
    side."""
    agent, verb, obj, tail = sensible(rng)
    good = render(agent, verb, obj, tail)
    if kind is SampleKind.SINGLE_SUBSTITUTION:
        bad = corrupt_substitution(rng, agent, verb, obj, tail)
    elif kind is SampleKind.REORDERED:
        bad = corrupt_reorder(agent, verb, obj, tail)
    else:
        bad = corrupt_unrelated(rng, verb)
    verdict = classify_pair(tokenize(good), tokenize(bad))
    assert verdict.kind is kind, f"{good!r} / {bad!r} classified {verdict.kind}"
    label = rng.randrange(2)
    if label == 0:
        return bad, good, 0, good
    return good, bad, 1, good


def make_task_a(rng: random.Random, n: int, first_id: int, split: str) -> tuple:
    """A labeled task-A dataset with a 0.6/0.25/0.15 kind mix, plus the
    sensible side of every pair (corpus material)."""
    kinds = (
        [SampleKind.SINGLE_SUBSTITUTION] * round(n * 0.6)
        + [SampleKind.REORDERED] * round(n * 0.25)
    )
    kinds += [SampleKind.UNSTRUCTURED] * (n - len(kinds))
    rng.shuffle(kinds)
    instances, sensible_sides = [], []
    for offset, kind in enumerate(kinds):
        sent0, sent1, label, good = make_pair(rng, kind)
        instances.append(
            InstanceA(id=first_id + offset, sent0=sent0, sent1=sent1, label=label)
        )
        sensible_sides.append(good)
    return Dataset(task="A", split=split, instances=tuple(instances)), sensible_sides


def make_task_b(rng: random.Random, n: int, first_id: int, split: str) -> Dataset:
    instances = []
    for offset in range(n):
        agent, verb, obj, tail = sensible(rng)
        bad_noun = rng.choice(IMPLAUSIBLE)
        statement = render(agent, verb, bad_noun, tail)
        correct = f"{bad_noun.capitalize()} is not something you can {VERB_BASE[verb]}."
        distractors = [
            f"The {agent} was very busy that day.",
            f"A {obj} is easy to {VERB_BASE[verb]}.",
        ]
        options = [correct, *distractors]
        rng.shuffle(options)
        instances.append(
            InstanceB(
                id=first_id + offset,
                false_statement=statement,
                options=tuple(options),
                label=options.index(correct),
            )
        )
    return Dataset(task="B", split=split, instances=tuple(instances))


def all_sensible_sentences() -> list[str]:
    return [
        render(agent, verb, obj, tail)
        for agent in AGENTS
        for verb in sorted(WORLD)
        for obj in WORLD[verb]
        for tail in TAILS[:1]
    ]


def make_sanity_fixture(rng: random.Random) -> tuple[list[str], Dataset]:
    """A 200-sentence corpus and 20 substitution pairs whose sensible
    sides appear verbatim in it."""
    pool = all_sensible_sentences()
    rng.shuffle(pool)
    corpus = pool[:200]
    instances = []
    for i in range(20):
        good = corpus[rng.randrange(len(corpus))]
        tokens = tokenize(good)
        agent, verb, obj = tokens[1], tokens[2], tokens[4]
        tail = " ".join(tokens[5:])
        bad = corrupt_substitution(rng, agent, verb, obj, tail)
        verdict = classify_pair(tokenize(good), tokenize(bad))
        assert verdict.kind is SampleKind.SINGLE_SUBSTITUTION
        label = rng.randrange(2)
        sent0, sent1 = (bad, good) if label == 0 else (good, bad)
        instances.append(InstanceA(id=900 + i, sent0=sent0, sent1=sent1, label=label))
    return corpus, Dataset(task="A", split="sanity", instances=tuple(instances))


def check_scorer(corpus: list[str], pairs: Dataset) -> float:
    model = train_ngram([tokenize(line) for line in corpus], n=3, alpha=0.1)
    correct = 0
    for inst in pairs:
        pred = score_pair_lm(model, inst)
        correct += (1 if pred.scalar >= 0.5 else 0) == inst.label
    return correct / len(pairs)


def main() -> int:
    rng = random.Random(SEED)
    synth = ROOT / "data" / "synth"
    fixtures = ROOT / "tests" / "fixtures"
    synth.mkdir(parents=True, exist_ok=True)
    fixtures.mkdir(parents=True, exist_ok=True)

    corpus_lines: list[str] = []
    for split, n, first_id in (("train", 120, 1000), ("dev", 60, 2000), ("test", 40, 3000)):
        dataset, sensible_sides = make_task_a(rng, n, first_id, split)
        write_task_a(
            dataset,
            synth / f"taskA_{split}_data.csv",
            synth / f"taskA_{split}_answers.csv",
        )
        if split == "train":
            corpus_lines.extend(sensible_sides)

    for split, n, first_id in (("train", 120, 5000), ("dev", 60, 6000), ("test", 40, 7000)):
        dataset = make_task_b(rng, n, first_id, split)
        write_task_b(
            dataset,
            synth / f"taskB_{split}_data.csv",
            synth / f"taskB_{split}_answers.csv",
        )

    extra = all_sensible_sentences()
    rng.shuffle(extra)
    corpus_lines.extend(extra[:180])
    (synth / "corpus.txt").write_text("\n".join(corpus_lines) + "\n", encoding="utf-8")

    corpus, sanity = make_sanity_fixture(rng)
    accuracy = check_scorer(corpus, sanity)
    assert accuracy >= 0.95, f"sanity construction too weak: accuracy {accuracy}"
    (fixtures / "corpus_200.txt").write_text("\n".join(corpus) + "\n", encoding="utf-8")
    write_task_a(
        sanity,
        fixtures / "sanity_pairs_data.csv",
        fixtures / "sanity_pairs_answers.csv",
    )

    print(f"wrote synthetic data under {synth} and fixtures under {fixtures}")
    print(f"sanity scorer accuracy: {accuracy:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
