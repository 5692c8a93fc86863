"""Text file formats: embeddings, checkpoints, document vectors, vocabulary."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .corpus import CorpusError, Vocabulary
from .textnet import write_edge_list
from .trainer import ROLES, EmbeddingTable, Embeddings

SIDECARS = {"word_context": ".context", "doc": ".doc", "label": ".label"}


def _fmt(x: float) -> str:
    # 9 significant digits round-trip float32 exactly
    return format(float(x), ".9g")


def write_vectors(path, names, vectors, header=True) -> None:
    vectors = np.asarray(vectors)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{vectors.shape[0]} {vectors.shape[1]}\n")
        for name, row in zip(names, vectors.tolist()):
            fh.write(str(name) + " " + " ".join(map(_fmt, row)) + "\n")


def read_vectors(path, header=True, dtype=np.float64):
    """Read ``name v1 ... vd`` lines; returns ``(names, matrix)``."""
    names, rows = [], []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    n = dim = None
    if header:
        if not lines:
            raise CorpusError(f"{path}: empty vector file")
        try:
            n, dim = map(int, lines[0].split())
        except ValueError:
            raise CorpusError(f"{path}: bad header {lines[0]!r}") from None
        lines = lines[1:]
    for lineno, line in enumerate(lines, 2 if header else 1):
        if not line.strip():
            continue
        parts = line.split(" ")
        if dim is None:
            dim = len(parts) - 1
        if len(parts) != dim + 1:
            raise CorpusError(f"{path}:{lineno}: expected {dim} values, found {len(parts) - 1}")
        names.append(parts[0])
        rows.append([float(v) for v in parts[1:]])
    if n is not None and len(names) != n:
        raise CorpusError(f"{path}: header announces {n} rows, found {len(names)}")
    mat = np.array(rows, dtype=dtype).reshape(len(rows), dim or 0)
    return names, mat


def save_embeddings(path, emb: Embeddings, vocab: Vocabulary) -> None:
    write_vectors(path, vocab.id_to_token, emb.word_target.vectors)


def load_word_vectors(path, vocab: Vocabulary | None = None):
    """Load a word embedding file as ``(Vocabulary, matrix)``.

    When ``vocab`` is given the file must list exactly its tokens, in order.
    """
    names, mat = read_vectors(path)
    if vocab is not None and tuple(names) != vocab.id_to_token:
        raise CorpusError(f"{path}: tokens do not match the vocabulary")
    if vocab is None:
        vocab = Vocabulary(tuple(names), (1,) * len(names))
    return vocab, mat


def checkpoint_paths(path) -> dict[str, Path]:
    path = Path(path)
    out = {"word_target": path}
    for role, suffix in SIDECARS.items():
        out[role] = path.with_name(path.name + suffix)
    return out


def save_checkpoint(path, emb: Embeddings, vocab: Vocabulary, label_names=()) -> dict[str, Path]:
    """Word table in the embedding format plus sidecars for the other tables."""
    paths = checkpoint_paths(path)
    save_embeddings(paths["word_target"], emb, vocab)
    write_vectors(paths["word_context"], vocab.id_to_token, emb.word_context.vectors)
    write_vectors(paths["doc"], [f"d{i}" for i in range(len(emb.doc))], emb.doc.vectors)
    write_vectors(paths["label"], list(label_names), emb.label.vectors)
    return paths


def load_checkpoint(path, vocab: Vocabulary, dtype="float32") -> Embeddings:
    paths = checkpoint_paths(path)
    tables = {}
    for role in ROLES:
        _, mat = read_vectors(paths[role], dtype=dtype)
        tables[role] = EmbeddingTable(role, np.ascontiguousarray(mat))
    if len(tables["word_target"]) != len(vocab):
        raise CorpusError(f"{path}: checkpoint has {len(tables['word_target'])} words, vocabulary {len(vocab)}")
    dims = {t.vectors.shape[1] for t in tables.values() if len(t)}
    if len(dims) > 1:
        raise CorpusError(f"{path}: checkpoint tables disagree on dimension")
    d = tables["word_target"].vectors.shape[1]
    for t in tables.values():
        if not len(t):
            t.vectors = np.zeros((0, d), dtype=dtype)
    return Embeddings(*(tables[r] for r in ROLES))


def write_vocabulary(path, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok, c in zip(vocab.id_to_token, vocab.counts):
            fh.write(f"{tok}\t{c}\n")


def read_vocabulary(path) -> Vocabulary:
    toks, counts = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            try:
                tok, c = line.split("\t")
                counts.append(int(c))
            except ValueError:
                raise CorpusError(f"{path}:{lineno}: expected 'token<TAB>count'") from None
            toks.append(tok)
    return Vocabulary(tuple(toks), tuple(counts))


def write_labels(path, pairs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for idx, lab in pairs:
            fh.write(f"{idx}\t{lab}\n")


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_edge_list_files(out_dir, hetnet, vocab: Vocabulary, label_names, kinds) -> dict[str, Path]:
    """Write one ``<kind>.tsv`` edge list per selected network."""
    written = {}
    for kind in kinds:
        path = Path(out_dir) / f"{kind}.tsv"
        write_edge_list(path, hetnet[kind], vocab, label_names)
        written[kind] = path
    return written
