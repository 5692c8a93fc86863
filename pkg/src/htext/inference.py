"""Text vectors as the mean of their in-vocabulary word vectors."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Vocabulary, tokenize


@dataclass(frozen=True)
class DocumentVector:
    vector: np.ndarray
    covered_tokens: int

    @property
    def empty(self) -> bool:
        return self.covered_tokens == 0


def _word_matrix(word_table) -> np.ndarray:
    return getattr(word_table, "vectors", word_table)


def embed_text(tokens: Sequence[str] | str, word_table, vocab: Vocabulary) -> DocumentVector:
    """Average the word vectors of ``tokens``, repeats counted, OOV tokens skipped.

    The mean is the minimizer of the summed squared Euclidean distance to the
    word vectors. Text with no known token gives the zero vector and
    ``covered_tokens == 0``.
    """
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    vecs = _word_matrix(word_table)
    ids = vocab.encode(tokens)
    if not ids:
        return DocumentVector(np.zeros(vecs.shape[1]), 0)
    counts = np.bincount(ids, minlength=len(vocab))
    used = np.flatnonzero(counts)
    vec = counts[used].astype(np.float64) @ vecs[used].astype(np.float64) / len(ids)
    return DocumentVector(vec, len(ids))


def embed_documents(docs: Iterable[Sequence[str] | str], word_table, vocab: Vocabulary):
    """Stack document vectors; returns ``(matrix, covered_counts)``."""
    out = [embed_text(d, word_table, vocab) for d in docs]
    d = _word_matrix(word_table).shape[1]
    if not out:
        return np.zeros((0, d)), np.zeros(0, dtype=np.int64)
    return np.vstack([o.vector for o in out]), np.array([o.covered_tokens for o in out])


def embed_id_documents(documents, word_vectors: np.ndarray) -> np.ndarray:
    """Mean vectors for documents already encoded as word ids (zero row when empty)."""
    word_vectors = np.asarray(word_vectors, dtype=np.float64)
    out = np.zeros((len(documents), word_vectors.shape[1]))
    for i, doc in enumerate(documents):
        if len(doc):
            out[i] = word_vectors[np.asarray(doc)].mean(axis=0)
    return out
