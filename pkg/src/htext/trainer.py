"""Edge-sampling SGD with negative sampling over the heterogeneous text network.

Word vectors on the generated side are one table shared by all three
networks. The conditioning side of each network has its own table: context
words for ``ww``, documents for ``wd`` and labels for ``wl``.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import _kernels
from .sampler import NoiseDistribution, edge_table, sample_negative
from .textnet import KINDS, HeterogeneousTextNetwork

log = logging.getLogger(__name__)

MODES = ("joint", "pretrain_finetune", "unsupervised")
ROLES = ("word_target", "word_context", "doc", "label")
SOURCE_ROLE = {"ww": "word_context", "wd": "doc", "wl": "label"}
RATE_FLOOR = 1e-4


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    dimension: int = 100
    samples: int = 1_000_000
    negatives: int = 5
    rate: float = 0.025
    window: int = 5
    mode: str = "joint"
    nets: tuple[str, ...] = ("ww", "wd", "wl")
    threads: int = 1
    seed: int = 1
    noise_power: float = 0.75
    finetune_samples: int | None = None  # phase-2 budget; None means ``samples``
    exact_sigmoid: bool = False
    clip: float = _kernels.GRAD_CLIP
    dtype: str = "float32"

    def __post_init__(self):
        mode = self.mode.replace("-", "_")
        object.__setattr__(self, "mode", mode)
        nets = tuple(k for k in KINDS if k in set(self.nets))
        if len(nets) != len(set(self.nets)):
            raise ValueError(f"unknown network kind in {self.nets!r}")
        object.__setattr__(self, "nets", nets)
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        if self.finetune_samples is not None and self.finetune_samples < 0:
            raise ValueError("finetune_samples must be >= 0")
        if self.negatives < 0:
            raise ValueError("negatives must be >= 0")
        if not self.rate > 0:
            raise ValueError("rate must be > 0")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")
        if mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        if not nets:
            raise ValueError("select at least one network")
        if mode == "unsupervised" and "wl" in nets:
            raise ValueError("unsupervised mode cannot use the word-label network")
        if mode == "pretrain_finetune" and ("wl" not in nets or len(nets) < 2):
            raise ValueError("pretrain_finetune needs wl plus at least one of ww, wd")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nets"] = list(self.nets)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        kw = {k: v for k, v in d.items() if k in known}
        if "nets" in kw:
            kw["nets"] = tuple(kw["nets"])
        return cls(**kw)


@dataclass
class EmbeddingTable:
    role: str
    vectors: np.ndarray

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown table role {self.role!r}")

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]


@dataclass
class Embeddings:
    """The four vector tables. ``word_target`` is the published word embedding."""

    word_target: EmbeddingTable
    word_context: EmbeddingTable
    doc: EmbeddingTable
    label: EmbeddingTable

    def __getitem__(self, role: str) -> EmbeddingTable:
        return getattr(self, role)

    def tables(self):
        return [self[r] for r in ROLES]

    def copy(self) -> "Embeddings":
        return Embeddings(*(EmbeddingTable(t.role, t.vectors.copy()) for t in self.tables()))

    def source_table(self, kind: str) -> EmbeddingTable:
        return self[SOURCE_ROLE[kind]]


def initialize_tables(config: TrainConfig, vertex_counts) -> Embeddings:
    """Uniform(-0.5/d, 0.5/d) initialization of every table.

    ``vertex_counts`` is ``(n_words, n_docs, n_labels)``. Each table draws
    from its own seeded stream so table sizes never shift one another.
    """
    n_words, n_docs, n_labels = vertex_counts
    if n_words < 1:
        raise ValueError("need at least one word vertex")
    sizes = {"word_target": n_words, "word_context": n_words, "doc": n_docs, "label": n_labels}
    d = config.dimension
    bound = 0.5 / d
    tables = []
    for i, role in enumerate(ROLES):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0, i]))
        vec = rng.uniform(-bound, bound, size=(sizes[role], d)).astype(config.dtype)
        tables.append(EmbeddingTable(role, vec))
    return Embeddings(*tables)


def vertex_counts(hetnet: HeterogeneousTextNetwork) -> tuple[int, int, int]:
    return hetnet.n_words, hetnet.wd.n_sources, hetnet.wl.n_sources


def learning_rate(t: int, total: int, rho0: float) -> float:
    if total <= 0:
        return rho0
    return rho0 * max(1.0 - t / total, RATE_FLOOR)


@dataclass
class TrainState:
    tables: Embeddings
    total: int
    rho0: float
    t: int = 0

    @property
    def rate(self) -> float:
        return learning_rate(self.t, self.total, self.rho0)


def conditional_probability(target_table, context_vec, target_id=None):
    """Softmax over every word of ``exp(u_i . u_j)`` given the conditioning vector.

    Returns the full distribution when ``target_id`` is None. Meant for
    diagnostics and tests; training never forms the full softmax.
    """
    vecs = target_table.vectors if isinstance(target_table, EmbeddingTable) else target_table
    scores = np.asarray(vecs, dtype=np.float64) @ np.asarray(context_vec, dtype=np.float64)
    scores -= scores.max()
    p = np.exp(scores)
    p /= p.sum()
    return p if target_id is None else float(p[target_id])


def network_objective(hetnet: HeterogeneousTextNetwork, emb: Embeddings, kinds=None) -> float:
    """Weighted negative log-likelihood ``-sum w_ij log p(word_i | source_j)`` with full softmax."""
    words = emb.word_target.vectors.astype(np.float64)
    total = 0.0
    for kind in kinds or hetnet.present:
        net = hetnet[kind]
        if not len(net):
            continue
        src = emb.source_table(kind).vectors.astype(np.float64)
        used = np.unique(net.source)
        scores = src[used] @ words.T
        mx = scores.max(axis=1, keepdims=True)
        log_z = (mx + np.log(np.exp(scores - mx).sum(axis=1, keepdims=True))).ravel()
        row = np.searchsorted(used, net.source)
        log_p = scores[row, net.target] - log_z[row]
        total -= float(np.dot(net.weight, log_p))
    return total


def edge_step(
    state: TrainState,
    kind: str,
    source_id: int,
    target_id: int,
    negatives=None,
    rho: float | None = None,
    noise: NoiseDistribution | None = None,
    rng: np.random.Generator | None = None,
    k: int = 0,
    exact_sigmoid: bool = False,
    clip: float = _kernels.GRAD_CLIP,
) -> TrainState:
    """Apply one SGD step for a positive edge, in place.

    Negative words are either given explicitly or ``k`` of them are drawn
    from ``noise`` with ``rng``. ``rho`` defaults to the state's scheduled rate.
    """
    if negatives is None:
        negatives = []
        if k:
            if noise is None or rng is None:
                raise ValueError("drawing negatives needs both noise and rng")
            negatives = [sample_negative(noise, target_id, rng) for _ in range(k)]
    tables = state.tables
    words = tables.word_target.vectors
    src = tables.source_table(kind).vectors
    targets = np.array([target_id, *negatives], dtype=np.int64)
    rho = state.rate if rho is None else rho
    coef = np.empty(len(targets))
    grad = np.empty(words.shape[1])
    ok = _kernels.edge_update(
        src[source_id], words, targets, rho, _SIG_TABLE, exact_sigmoid, clip, coef, grad
    )
    if not ok:
        raise TrainingError(f"non-finite score on {kind} edge ({source_id} -> {target_id})")
    return state


_SIG_TABLE = _kernels.make_sigmoid_table()


class _Packed:
    """Alias tables of the selected networks concatenated for the compiled loop."""

    def __init__(self, hetnet: HeterogeneousTextNetwork, kinds, power: float, n_neg: int):
        parts = {name: [] for name in ("e_src", "e_tgt", "e_prob", "e_alias", "n_prob", "n_alias", "n_ids")}
        empty_i, empty_f = np.zeros(0, np.int64), np.zeros(0)
        for kind in KINDS:
            net = hetnet[kind]
            if kind not in kinds:
                for name in parts:
                    parts[name].append(empty_f if name in ("e_prob", "n_prob") else empty_i)
                continue
            if len(net) == 0:
                raise TrainingError(f"network {kind} is selected but has no edges")
            et = edge_table(net)
            noise = NoiseDistribution.for_network(net, power)
            if n_neg > 0 and len(noise.ids) < 2:
                raise TrainingError(f"network {kind}: negative sampling needs two or more words with edges")
            for name, arr in (
                ("e_src", net.source), ("e_tgt", net.target), ("e_prob", et.prob),
                ("e_alias", et.alias), ("n_prob", noise.table.prob),
                ("n_alias", noise.table.alias), ("n_ids", noise.ids),
            ):
                parts[name].append(arr)
        for name, arrs in parts.items():
            setattr(self, name, np.ascontiguousarray(np.concatenate(arrs)))
        self.e_off = np.concatenate([[0], np.cumsum([len(a) for a in parts["e_src"]])]).astype(np.int64)
        self.n_off = np.concatenate([[0], np.cumsum([len(a) for a in parts["n_ids"]])]).astype(np.int64)
        self.active = np.array([KINDS.index(k) for k in KINDS if k in kinds], dtype=np.int64)


def _worker_state(seed: int, kinds, worker: int) -> np.ndarray:
    mask = sum(1 << KINDS.index(k) for k in kinds)
    return np.random.SeedSequence([seed + worker, 1, mask]).generate_state(1, dtype=np.uint64)


def run_phase(hetnet, emb: Embeddings, kinds, n_iter: int, config: TrainConfig) -> Embeddings:
    """Alternate one edge step per network in ``kinds`` for ``n_iter`` iterations, in place.

    The random stream depends only on the seed, the worker index and the set
    of networks, so e.g. a word-label-only phase draws the same edges whether
    it runs alone or after a pretraining phase.
    """
    kinds = tuple(k for k in KINDS if k in kinds)
    if n_iter <= 0 or not kinds:
        return emb
    packed = _Packed(hetnet, kinds, config.noise_power, config.negatives)
    n_workers = min(config.threads, n_iter)
    progress = np.zeros(n_workers, dtype=np.int64)
    shares = [n_iter // n_workers + (w < n_iter % n_workers) for w in range(n_workers)]
    status = [None] * n_workers
    diags = [np.zeros(4, dtype=np.int64) for _ in range(n_workers)]
    tables = [np.ascontiguousarray(t.vectors) for t in emb.tables()]
    for t, arr in zip(emb.tables(), tables):
        t.vectors = arr

    def work(w):
        status[w] = _kernels.train_loop(
            packed.active,
            packed.e_src, packed.e_tgt, packed.e_prob, packed.e_alias, packed.e_off,
            packed.n_prob, packed.n_alias, packed.n_ids, packed.n_off,
            *tables,
            shares[w], n_iter, float(config.rate), config.negatives, float(config.clip),
            config.exact_sigmoid, _SIG_TABLE,
            _worker_state(config.seed, kinds, w), progress, w, n_workers, diags[w],
        )

    if n_workers == 1:
        work(0)
    else:
        threads = [threading.Thread(target=work, args=(w,)) for w in range(n_workers)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
    for w, code in enumerate(status):
        if code == _kernels.OK:
            continue
        it, slot, s, t = diags[w].tolist()
        what = "non-finite score" if code == _kernels.NON_FINITE else "negative sampling exhausted"
        raise TrainingError(
            f"{what} at iteration {it} (worker {w}) on {KINDS[slot]} edge {s} -> {t}; "
            f"rate={config.rate}, dimension={config.dimension}"
        )
    return emb


def _require(hetnet, kinds):
    for k in kinds:
        if len(hetnet[k]) == 0:
            raise TrainingError(f"network {k} is required but empty")


def train_joint(hetnet: HeterogeneousTextNetwork, config: TrainConfig, init: Embeddings | None = None) -> Embeddings:
    """Each of ``config.samples`` iterations samples one edge from every selected network."""
    _require(hetnet, config.nets)
    emb = init.copy() if init is not None else initialize_tables(config, vertex_counts(hetnet))
    return run_phase(hetnet, emb, config.nets, config.samples, config)


def train_pretrain_finetune(hetnet: HeterogeneousTextNetwork, config: TrainConfig, init: Embeddings | None = None) -> Embeddings:
    """Unsupervised phase over ww/wd, then a word-label phase with a fresh rate schedule."""
    unsup = tuple(k for k in ("ww", "wd") if k in config.nets and len(hetnet[k]))
    _require(hetnet, ("wl",))
    emb = init.copy() if init is not None else initialize_tables(config, vertex_counts(hetnet))
    run_phase(hetnet, emb, unsup, config.samples, config)
    n_fine = config.samples if config.finetune_samples is None else config.finetune_samples
    return run_phase(hetnet, emb, ("wl",), n_fine, config)


def train(hetnet: HeterogeneousTextNetwork, config: TrainConfig, init: Embeddings | None = None) -> Embeddings:
    if config.mode == "pretrain_finetune":
        return train_pretrain_finetune(hetnet, config, init)
    # joint and unsupervised differ only in which networks may be selected
    return train_joint(hetnet, config, init)
