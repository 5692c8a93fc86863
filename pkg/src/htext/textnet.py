"""Word-word, word-document and word-label bipartite networks.

Every network is stored with words on the generated (target) side and the
conditioning vertex (context word, document or label) on the source side,
so an edge ``(source, target, weight)`` contributes ``weight * log p(target | source)``
to the training objective.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import Corpus, CorpusError, Vocabulary

KINDS = ("ww", "wd", "wl")


@dataclass(frozen=True, eq=False)
class BipartiteNetwork:
    kind: str
    source: np.ndarray  # int64, source-side vertex ids
    target: np.ndarray  # int64, word ids
    weight: np.ndarray  # float64, > 0
    n_words: int
    n_sources: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown network kind {self.kind!r}")
        n = len(self.source)
        if len(self.target) != n or len(self.weight) != n:
            raise ValueError("edge arrays differ in length")
        if n:
            if np.any(self.weight <= 0):
                raise ValueError("edge weights must be positive")
            if self.source.min() < 0 or self.source.max() >= self.n_sources:
                raise ValueError("source id out of range")
            if self.target.min() < 0 or self.target.max() >= self.n_words:
                raise ValueError("target id out of range")
            keys = self.source * self.n_words + self.target
            if len(np.unique(keys)) != n:
                raise ValueError("duplicate (source, target) edge")
        for arr in (self.source, self.target, self.weight):
            arr.setflags(write=False)

    @classmethod
    def from_pairs(cls, kind, source, target, n_words, n_sources, weight=None):
        """Aggregate (possibly repeated) pairs into a deduplicated edge set.

        Output edges are sorted by (source, target).
        """
        source = np.asarray(source, dtype=np.int64)
        target = np.asarray(target, dtype=np.int64)
        w = np.ones(len(source)) if weight is None else np.asarray(weight, dtype=np.float64)
        if len(source) == 0:
            empty = np.zeros(0, dtype=np.int64)
            return cls(kind, empty, empty.copy(), np.zeros(0), n_words, n_sources)
        keys = source * n_words + target
        uniq, inverse = np.unique(keys, return_inverse=True)
        summed = np.bincount(inverse, weights=w, minlength=len(uniq))
        return cls(kind, uniq // n_words, uniq % n_words, summed, n_words, n_sources)

    @classmethod
    def empty(cls, kind, n_words, n_sources=0):
        return cls.from_pairs(kind, [], [], n_words, n_sources)

    def __len__(self) -> int:
        return len(self.source)

    @property
    def side_sizes(self) -> tuple[int, int]:
        return self.n_words, self.n_sources

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    @cached_property
    def word_degrees(self) -> np.ndarray:
        """Weighted degree of each word on the target side."""
        return np.bincount(self.target, weights=self.weight, minlength=self.n_words)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {(int(s), int(t)): float(w) for s, t, w in zip(self.source, self.target, self.weight)}


@dataclass(frozen=True, eq=False)
class HeterogeneousTextNetwork:
    ww: BipartiteNetwork
    wd: BipartiteNetwork
    wl: BipartiteNetwork
    n_words: int

    def __post_init__(self):
        for net, kind in zip(self.networks, KINDS):
            if net.kind != kind:
                raise ValueError(f"slot {kind} holds a {net.kind} network")
            if net.n_words != self.n_words:
                raise ValueError("networks disagree on the word vertex count")

    @property
    def networks(self) -> tuple[BipartiteNetwork, BipartiteNetwork, BipartiteNetwork]:
        return self.ww, self.wd, self.wl

    def __getitem__(self, kind: str) -> BipartiteNetwork:
        return getattr(self, kind)

    @property
    def present(self) -> tuple[str, ...]:
        return tuple(k for k in KINDS if len(self[k]))


def _doc_arrays(corpus: Corpus):
    lengths = np.fromiter((len(d) for d in corpus.documents), dtype=np.int64, count=len(corpus))
    tokens = np.fromiter(
        (w for d in corpus.documents for w in d), dtype=np.int64, count=int(lengths.sum())
    )
    doc_of = np.repeat(np.arange(len(corpus), dtype=np.int64), lengths)
    return tokens, doc_of


def build_word_word(corpus: Corpus, window: int = 5) -> BipartiteNetwork:
    """Positional co-occurrence counts within ``window`` positions on each side.

    Every ordered position pair ``(p, q)`` with ``0 < |p - q| <= window`` inside
    one document adds 1 to the edge ``word[p] -> word[q]``, so the result is
    symmetric and repeated tokens produce self-pairs.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    n_words = len(corpus.vocab)
    tokens, doc_of = _doc_arrays(corpus)
    srcs, tgts = [], []
    for offset in range(1, window + 1):
        if offset >= len(tokens):
            break
        same_doc = doc_of[:-offset] == doc_of[offset:]
        left, right = tokens[:-offset][same_doc], tokens[offset:][same_doc]
        srcs += [left, right]
        tgts += [right, left]
    if not srcs:
        return BipartiteNetwork.empty("ww", n_words, n_words)
    return BipartiteNetwork.from_pairs(
        "ww", np.concatenate(srcs), np.concatenate(tgts), n_words, n_words
    )


def build_word_doc(corpus: Corpus) -> BipartiteNetwork:
    tokens, doc_of = _doc_arrays(corpus)
    return BipartiteNetwork.from_pairs("wd", doc_of, tokens, len(corpus.vocab), len(corpus))


def build_word_label(corpus: Corpus) -> BipartiteNetwork:
    """Term frequencies summed over the documents carrying each label."""
    corpus.require_labels()
    tokens, doc_of = _doc_arrays(corpus)
    doc_label = np.array([-1 if lab is None else lab for lab in corpus.labels], dtype=np.int64)
    tok_label = doc_label[doc_of]
    keep = tok_label >= 0
    return BipartiteNetwork.from_pairs(
        "wl", tok_label[keep], tokens[keep], len(corpus.vocab), len(corpus.label_names)
    )


def parse_nets(spec: str | Iterable[str]) -> tuple[str, ...]:
    """Normalize a network selection such as ``"ww,wd"`` into canonical order."""
    items = spec.split(",") if isinstance(spec, str) else list(spec)
    chosen = {s.strip() for s in items if s.strip()}
    unknown = chosen - set(KINDS)
    if unknown:
        raise ValueError(f"unknown network kind(s): {', '.join(sorted(unknown))}")
    if not chosen:
        raise ValueError("select at least one of ww, wd, wl")
    return tuple(k for k in KINDS if k in chosen)


def build_heterogeneous(corpus: Corpus, window: int = 5, nets="ww,wd,wl") -> HeterogeneousTextNetwork:
    selected = parse_nets(nets)
    n_words = len(corpus.vocab)
    ww = build_word_word(corpus, window) if "ww" in selected else BipartiteNetwork.empty("ww", n_words, n_words)
    wd = build_word_doc(corpus) if "wd" in selected else BipartiteNetwork.empty("wd", n_words, len(corpus))
    if "wl" in selected:
        wl = build_word_label(corpus)
    else:
        wl = BipartiteNetwork.empty("wl", n_words, len(corpus.label_names))
    return HeterogeneousTextNetwork(ww, wd, wl, n_words)


# -- edge-list files ---------------------------------------------------------


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def write_edge_list(path, net: BipartiteNetwork, vocab: Vocabulary, label_names=()) -> None:
    """Write ``kind<TAB>source<TAB>target<TAB>weight`` lines with readable vertex names."""
    words = vocab.id_to_token
    if net.kind == "ww":
        name = words.__getitem__
    elif net.kind == "wd":
        name = "d{}".format
    else:
        name = tuple(label_names).__getitem__
    with open(path, "w", encoding="utf-8") as fh:
        for s, t, w in zip(net.source.tolist(), net.target.tolist(), net.weight.tolist()):
            fh.write(f"{net.kind}\t{name(s)}\t{words[t]}\t{_fmt_weight(w)}\n")


def read_edge_list(path, vocab: Vocabulary, n_docs: int | None = None, label_names=None):
    """Read an edge-list file back into a :class:`BipartiteNetwork`.

    Label strings not in ``label_names`` are appended in order of first
    appearance; the (possibly extended) label name tuple is returned as the
    second element.
    """
    labels = list(label_names or ())
    label_index = {name: i for i, name in enumerate(labels)}
    kind = None
    src, tgt, wts = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise CorpusError(f"{path}:{lineno}: expected 4 tab-separated fields")
            k, s, t, w = parts
            if k not in KINDS:
                raise CorpusError(f"{path}:{lineno}: unknown kind {k!r}")
            if kind is None:
                kind = k
            elif k != kind:
                raise CorpusError(f"{path}:{lineno}: mixed network kinds in one file")
            if t not in vocab:
                raise CorpusError(f"{path}:{lineno}: target {t!r} not in vocabulary")
            if k == "ww":
                if s not in vocab:
                    raise CorpusError(f"{path}:{lineno}: source {s!r} not in vocabulary")
                sid = vocab.token_to_id[s]
            elif k == "wd":
                if not (s.startswith("d") and s[1:].isdigit()):
                    raise CorpusError(f"{path}:{lineno}: document source must look like d<number>")
                sid = int(s[1:])
            else:
                if s not in label_index:
                    label_index[s] = len(labels)
                    labels.append(s)
                sid = label_index[s]
            try:
                weight = float(w)
            except ValueError:
                raise CorpusError(f"{path}:{lineno}: bad weight {w!r}") from None
            src.append(sid)
            tgt.append(vocab.token_to_id[t])
            wts.append(weight)
    if kind is None:
        raise CorpusError(f"{path}: empty edge list")
    n_words = len(vocab)
    if kind == "ww":
        n_sources = n_words
    elif kind == "wd":
        n_sources = max(max(src) + 1, n_docs or 0)
    else:
        n_sources = len(labels)
    return BipartiteNetwork.from_pairs(kind, src, tgt, n_words, n_sources, wts), tuple(labels)
