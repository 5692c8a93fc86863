"""Vocabulary and integer-indexed corpus construction.

Tokenization is plain whitespace splitting with no case folding; any text
normalization is expected to happen before the files reach this package.
A document's identity is its 0-based line number in the corpus file.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class CorpusError(ValueError):
    """Raised for malformed or degenerate corpus input."""


@dataclass(frozen=True)
class Vocabulary:
    id_to_token: tuple[str, ...]
    counts: tuple[int, ...]
    token_to_id: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.id_to_token) != len(self.counts):
            raise CorpusError("id_to_token and counts differ in length")
        mapping = {tok: i for i, tok in enumerate(self.id_to_token)}
        if len(mapping) != len(self.id_to_token):
            raise CorpusError("duplicate token in vocabulary")
        object.__setattr__(self, "token_to_id", mapping)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def encode(self, tokens: Iterable[str]) -> list[int]:
        """Map tokens to ids, silently dropping out-of-vocabulary tokens."""
        lookup = self.token_to_id
        return [lookup[t] for t in tokens if t in lookup]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.id_to_token[i] for i in ids]


def tokenize(line: str) -> list[str]:
    return line.split()


def build_vocabulary(docs: Iterable[Sequence[str] | str], min_count: int = 1) -> Vocabulary:
    """Count tokens over ``docs`` and keep those seen at least ``min_count`` times.

    Documents may be given as token sequences or as raw lines. Ids are
    assigned by descending count, ties broken by the token string, so the
    result does not depend on document order.
    """
    if min_count < 1:
        raise CorpusError(f"min_count must be >= 1, got {min_count}")
    freq: Counter[str] = Counter()
    for doc in docs:
        freq.update(tokenize(doc) if isinstance(doc, str) else doc)
    kept = sorted((t for t, c in freq.items() if c >= min_count), key=lambda t: (-freq[t], t))
    if not kept:
        raise CorpusError("empty corpus: no token reaches min_count")
    return Vocabulary(tuple(kept), tuple(freq[t] for t in kept))


@dataclass(frozen=True)
class Corpus:
    """Documents as word-id sequences, with optional per-document labels.

    ``labels[i]`` is a label id or ``None`` for an unlabeled document.
    """

    documents: tuple[tuple[int, ...], ...]
    labels: tuple[int | None, ...]
    label_names: tuple[str, ...]
    vocab: Vocabulary

    def __post_init__(self):
        if len(self.documents) != len(self.labels):
            raise CorpusError("documents and labels differ in length")
        n_words = len(self.vocab)
        for doc in self.documents:
            if any(w < 0 or w >= n_words for w in doc):
                raise CorpusError("word id out of vocabulary range")
        n_labels = len(self.label_names)
        for lab in self.labels:
            if lab is not None and not 0 <= lab < n_labels:
                raise CorpusError(f"label id {lab} out of range")

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def n_labeled(self) -> int:
        return sum(lab is not None for lab in self.labels)

    @property
    def n_tokens(self) -> int:
        return sum(len(d) for d in self.documents)

    def require_labels(self) -> None:
        if self.n_labeled == 0:
            raise CorpusError("no labeled documents: supervised modes need at least one")

    @classmethod
    def from_tokens(
        cls,
        docs: Sequence[Sequence[str] | str],
        vocab: Vocabulary,
        labels: Sequence[str | None] | None = None,
        label_names: Sequence[str] | None = None,
    ) -> "Corpus":
        """Build a corpus from in-memory documents and optional label strings.

        ``label_names`` fixes the label-id order; by default it is the sorted
        set of label strings present.
        """
        encoded = tuple(
            tuple(vocab.encode(tokenize(d) if isinstance(d, str) else d)) for d in docs
        )
        if labels is None:
            labels = [None] * len(encoded)
        if len(labels) != len(encoded):
            raise CorpusError("one label entry (or None) is required per document")
        if label_names is None:
            label_names = sorted({lab for lab in labels if lab is not None})
        names = tuple(label_names)
        index = {name: i for i, name in enumerate(names)}
        try:
            ids = tuple(None if lab is None else index[lab] for lab in labels)
        except KeyError as exc:
            raise CorpusError(f"label {exc.args[0]!r} not in label_names") from None
        return cls(encoded, ids, names, vocab)


def read_documents(text_path: str | Path) -> list[list[str]]:
    with open(text_path, encoding="utf-8") as fh:
        return [tokenize(line) for line in fh.read().splitlines()]


def read_labels(labels_path: str | Path, n_docs: int) -> dict[int, str]:
    """Parse a ``doc_index<TAB>label`` sidecar into ``{doc_index: label}``."""
    out: dict[int, str] = {}
    with open(labels_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[1]:
                raise CorpusError(f"{labels_path}:{lineno}: expected 'doc_index<TAB>label'")
            try:
                idx = int(parts[0])
            except ValueError:
                raise CorpusError(f"{labels_path}:{lineno}: bad document index {parts[0]!r}") from None
            if not 0 <= idx < n_docs:
                raise CorpusError(
                    f"{labels_path}:{lineno}: document index {idx} out of range (corpus has {n_docs})"
                )
            if idx in out:
                raise CorpusError(f"{labels_path}:{lineno}: duplicate label for document {idx}")
            out[idx] = parts[1]
    return out


def load_corpus(
    text_path: str | Path,
    labels_path: str | Path | None,
    vocab: Vocabulary,
    label_names: Sequence[str] | None = None,
) -> Corpus:
    docs = read_documents(text_path)
    labels: list[str | None] = [None] * len(docs)
    if labels_path is not None:
        for idx, lab in read_labels(labels_path, len(docs)).items():
            labels[idx] = lab
    if label_names is not None:
        extra = sorted({lab for lab in labels if lab is not None} - set(label_names))
        label_names = list(label_names) + extra
    return Corpus.from_tokens(docs, vocab, labels, label_names)
