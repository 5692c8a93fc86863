"""End-to-end runs: build networks, train, embed documents, classify.

Test documents never enter vocabulary or network construction; only the
labeled part of the training set feeds the word-label network and the
classifier.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .classify import EvalReport, evaluate, predict, train_classifier
from .corpus import Corpus, build_vocabulary
from .inference import embed_documents
from .textnet import build_heterogeneous
from .trainer import Embeddings, TrainConfig, train


@dataclass
class LabeledSplit:
    docs: list[list[str]]
    labels: list[str | None]


def synthetic_corpus(
    n_train: int = 400,
    n_test: int = 400,
    doc_len: int = 20,
    n_classes: int = 2,
    topic_size: int = 50,
    noise_size: int = 100,
    topic_prob: float = 0.7,
    seed: int = 0,
) -> tuple[LabeledSplit, LabeledSplit]:
    """Documents whose tokens come from a class-specific topical vocabulary
    with probability ``topic_prob`` and from a shared noise vocabulary
    otherwise, uniformly within each vocabulary. Classes alternate by
    document index.
    """
    rng = np.random.default_rng(seed)

    def make(n):
        docs, labels = [], []
        for i in range(n):
            c = i % n_classes
            topical = rng.random(doc_len) < topic_prob
            topic_ids = rng.integers(topic_size, size=doc_len)
            noise_ids = rng.integers(noise_size, size=doc_len)
            docs.append([
                f"c{c}w{t}" if is_topic else f"n{z}"
                for is_topic, t, z in zip(topical, topic_ids, noise_ids)
            ])
            labels.append(f"class{c}")
        return LabeledSplit(docs, labels)

    return make(n_train), make(n_test)


def hide_labels(labels: Sequence[str | None], fraction: float, seed: int = 0) -> list[str | None]:
    """Keep a random ``fraction`` of the labels (at least one per class present)."""
    labels = list(labels)
    idx = [i for i, lab in enumerate(labels) if lab is not None]
    rng = np.random.default_rng(seed)
    rng.shuffle(idx)
    keep = set(idx[: max(1, int(round(fraction * len(idx))))])
    seen = {labels[i] for i in keep}
    for i in idx:
        if labels[i] not in seen:
            keep.add(i)
            seen.add(labels[i])
    return [lab if i in keep else None for i, lab in enumerate(labels)]


@dataclass
class PipelineResult:
    report: EvalReport
    embeddings: Embeddings
    corpus: Corpus
    predictions: np.ndarray


def run_pipeline(
    train_split: LabeledSplit,
    test_split: LabeledSplit,
    config: TrainConfig,
    min_count: int = 1,
    C_reg: float = 1.0,
) -> PipelineResult:
    vocab = build_vocabulary(train_split.docs, min_count)
    label_names = sorted({lab for lab in train_split.labels + test_split.labels if lab is not None})
    corpus = Corpus.from_tokens(train_split.docs, vocab, train_split.labels, label_names)
    hetnet = build_heterogeneous(corpus, config.window, config.nets)
    emb = train(hetnet, config)
    words = emb.word_target

    X_train, _ = embed_documents(train_split.docs, words, vocab)
    labeled = [i for i, lab in enumerate(corpus.labels) if lab is not None]
    y_train = np.array([corpus.labels[i] for i in labeled])
    model = train_classifier(X_train[labeled], y_train, C_reg)

    index = {name: i for i, name in enumerate(label_names)}
    X_test, _ = embed_documents(test_split.docs, words, vocab)
    y_test = np.array([index[lab] for lab in test_split.labels])
    pred = predict(model, X_test)
    report = evaluate(pred, y_test, classes=np.arange(len(label_names)))
    return PipelineResult(report, emb, corpus, pred)


def sweep(train_split, test_split, config: TrainConfig, axis: str, values, **kw):
    """Yield ``(x, micro_f1, macro_f1)`` while varying ``samples`` or the labeled fraction."""
    for x in values:
        if axis == "samples":
            res = run_pipeline(train_split, test_split, replace(config, samples=int(x)), **kw)
        elif axis == "labeled-fraction":
            split = LabeledSplit(train_split.docs, hide_labels(train_split.labels, float(x), config.seed))
            res = run_pipeline(split, test_split, config, **kw)
        else:
            raise ValueError(f"unknown sweep axis {axis!r}")
        yield x, res.report.micro_f1, res.report.macro_f1
