"""Deterministic synthetic text-classification task with a sentence repository.

Each class owns a private vocabulary of random letter words; sentences mix
class words with shared noise words. The unlabelled repository is drawn
from the same generative process, so nearest neighbours of a training
sentence are mostly sentences of the same latent class. This gives the
augmentation pipeline something real to retrieve at desk scale.
"""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .data import Dataset, LabeledExample
from .embedder import HashedNgramEmbedder
from .errors import ConfigError
from .index import SentenceRepository


@dataclass
class SynthTask:
    dataset: Dataset
    repo: SentenceRepository
    repo_latent: np.ndarray  # latent class of each repository sentence


def _make_words(rng: np.random.Generator, count: int, min_len: int = 3, max_len: int = 8) -> list[str]:
    letters = np.array(list(string.ascii_lowercase))
    words = set()
    while len(words) < count:
        length = int(rng.integers(min_len, max_len + 1))
        words.add("".join(rng.choice(letters, size=length)))
    return sorted(words)


def _make_sentence(
    rng: np.random.Generator,
    class_vocab: list[str],
    shared_vocab: list[str],
    length_range: tuple[int, int],
    class_word_prob: float,
) -> str:
    length = int(rng.integers(length_range[0], length_range[1] + 1))
    words = []
    for _ in range(length):
        if rng.random() < class_word_prob:
            words.append(class_vocab[int(rng.integers(0, len(class_vocab)))])
        else:
            words.append(shared_vocab[int(rng.integers(0, len(shared_vocab)))])
    return " ".join(words)


def make_synthetic_task(
    num_classes: int = 3,
    train_size: int = 600,
    dev_size: int = 200,
    test_size: int = 400,
    repo_size: int = 10_000,
    seed: int = 7,
    embedder: HashedNgramEmbedder | None = None,
    vocab_per_class: int = 30,
    shared_vocab_size: int = 40,
    length_range: tuple[int, int] = (4, 9),
    class_word_prob: float = 0.7,
) -> SynthTask:
    """Generate dataset splits plus an aligned repository, all from one seed."""
    if num_classes < 2:
        raise ConfigError("need at least 2 classes")
    if min(train_size, dev_size, test_size, repo_size) < 1:
        raise ConfigError("all sizes must be >= 1")
    rng = np.random.default_rng(seed)
    embedder = embedder or HashedNgramEmbedder(dim=64, seed=0)
    vocabs = [_make_words(rng, vocab_per_class) for _ in range(num_classes)]
    shared = _make_words(rng, shared_vocab_size)

    def make_split(size: int) -> list[LabeledExample]:
        examples = []
        for i in range(size):
            label = i % num_classes  # balanced splits
            text = _make_sentence(rng, vocabs[label], shared, length_range, class_word_prob)
            examples.append(LabeledExample(id=i, text=text, label=label))
        return examples

    train = make_split(train_size)
    dev = make_split(dev_size)
    test = make_split(test_size)
    dataset = Dataset(
        name="synthetic",
        train=train,
        dev=dev,
        test=test,
        label_names=[f"class{c}" for c in range(num_classes)],
    )

    latent = rng.integers(0, num_classes, size=repo_size)
    sentences = [
        _make_sentence(rng, vocabs[int(c)], shared, length_range, class_word_prob)
        for c in latent
    ]
    repo = SentenceRepository(sentences=sentences, embeddings=embedder.embed_batch(sentences))
    return SynthTask(dataset=dataset, repo=repo, repo_latent=latent)
