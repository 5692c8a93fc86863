"""Command-line entry point: ``htext {synth,build-network,train,infer,eval}``.

Exit status is 0 on success, 1 when arguments fail validation and 2 when a
stage fails at runtime. Every command validates its arguments before any
output file is created.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classify import ClassifierError, evaluate, predict, train_classifier
from .corpus import CorpusError, build_vocabulary, load_corpus, read_documents, read_labels
from .formats import (
    load_checkpoint,
    load_word_vectors,
    read_vectors,
    read_vocabulary,
    save_checkpoint,
    save_embeddings,
    write_edge_list_files,
    write_json,
    write_labels,
    write_vectors,
    write_vocabulary,
)
from .inference import embed_text
from .pipeline import LabeledSplit, sweep, synthetic_corpus
from .sampler import SamplingError
from .textnet import KINDS, HeterogeneousTextNetwork, BipartiteNetwork, build_heterogeneous, parse_nets, read_edge_list
from .trainer import TrainConfig, TrainingError, train

log = logging.getLogger("htext")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _need_file(path, what):
    if path is None or not Path(path).is_file():
        raise UsageError(f"{what} not found: {path}")


def _need_out_parent(path):
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise UsageError(f"output directory does not exist: {parent}")


@dataclass
class RunManifest:
    config: dict
    inputs: dict  # path -> sha256
    seed: int
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    network_dir: str = ""
    init_from: str | None = None
    version: str = __version__

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        known = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in d.items() if k in known})


# -- synth ---------------------------------------------------------------------


def cmd_synth(args) -> int:
    out = Path(args.out_dir)
    if out.exists() and not out.is_dir():
        raise UsageError(f"{out} exists and is not a directory")
    train_split, test_split = synthetic_corpus(args.n_train, args.n_test, seed=args.seed)
    out.mkdir(parents=True, exist_ok=True)
    for name, split in (("train", train_split), ("test", test_split)):
        (out / f"{name}.txt").write_text("".join(" ".join(d) + "\n" for d in split.docs), encoding="utf-8")
        write_labels(out / f"{name}_labels.tsv", enumerate(split.labels))
    print(f"wrote synthetic corpus to {out}")
    return EXIT_OK


# -- build-network -------------------------------------------------------------


def cmd_build_network(args) -> int:
    _need_file(args.text, "corpus file")
    try:
        nets = parse_nets(args.nets)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if "wl" in nets and args.labels is None:
        raise UsageError("--nets wl requires --labels")
    if args.labels is not None:
        _need_file(args.labels, "labels file")
    if args.window < 1:
        raise UsageError("--window must be >= 1")
    if args.min_count < 1:
        raise UsageError("--min-count must be >= 1")
    out = Path(args.out_dir)
    if out.exists() and not out.is_dir():
        raise UsageError(f"{out} exists and is not a directory")

    docs = read_documents(args.text)
    vocab = build_vocabulary(docs, args.min_count)
    corpus = load_corpus(args.text, args.labels, vocab)
    hetnet = build_heterogeneous(corpus, args.window, nets)

    out.mkdir(parents=True, exist_ok=True)
    write_vocabulary(out / "vocab.tsv", vocab)
    written = write_edge_list_files(out, hetnet, vocab, corpus.label_names, nets)
    meta = {
        "nets": list(nets),
        "window": args.window,
        "min_count": args.min_count,
        "n_docs": len(corpus),
        "n_words": len(vocab),
        "label_names": list(corpus.label_names),
        "text_sha256": sha256(args.text),
    }
    write_json(out / "meta.json", meta)
    for kind, path in written.items():
        print(f"{kind}: {len(hetnet[kind])} edges -> {path}")
    return EXIT_OK


def load_network_dir(path, nets=KINDS):
    """Read a directory produced by ``build-network``."""
    path = Path(path)
    vocab = read_vocabulary(path / "vocab.tsv")
    meta = json.loads((path / "meta.json").read_text(encoding="utf-8"))
    label_names = tuple(meta.get("label_names", ()))
    n_docs = int(meta.get("n_docs", 0))
    slots = {}
    for kind in KINDS:
        f = path / f"{kind}.tsv"
        if kind in nets and f.is_file():
            net, label_names = read_edge_list(f, vocab, n_docs, label_names)
            slots[kind] = net
    n_words = len(vocab)
    empty_sources = {"ww": n_words, "wd": n_docs, "wl": len(label_names)}
    for kind in KINDS:
        net = slots.get(kind)
        if net is None:
            slots[kind] = BipartiteNetwork.empty(kind, n_words, empty_sources[kind])
        elif kind == "wl" and net.n_sources < len(label_names):
            slots[kind] = BipartiteNetwork(kind, net.source, net.target, net.weight, n_words, len(label_names))
    return HeterogeneousTextNetwork(slots["ww"], slots["wd"], slots["wl"], n_words), vocab, label_names


# -- train ---------------------------------------------------------------------


def add_train_args(p, defaults=True):
    d = TrainConfig()
    g = p.add_argument_group("training")
    g.add_argument("--nets", default="ww,wd,wl" if defaults else None, help="comma list of ww, wd, wl")
    g.add_argument("--mode", default=d.mode if defaults else None, choices=["joint", "pretrain-finetune", "pretrain_finetune", "unsupervised"])
    g.add_argument("--dim", type=int, default=d.dimension if defaults else None)
    g.add_argument("--samples", type=int, default=d.samples if defaults else None, help="iterations T")
    g.add_argument("--finetune-samples", type=int, default=None, help="phase-2 iterations (default: --samples)")
    g.add_argument("--negatives", type=int, default=d.negatives if defaults else None)
    g.add_argument("--rate", type=float, default=d.rate if defaults else None, help="initial learning rate")
    g.add_argument("--window", type=int, default=d.window if defaults else None)
    g.add_argument("--noise-power", type=float, default=d.noise_power if defaults else None)
    g.add_argument("--threads", type=int, default=d.threads if defaults else None)
    g.add_argument("--seed", type=int, default=d.seed if defaults else None)
    g.add_argument("--dtype", choices=["float32", "float64"], default=d.dtype if defaults else None)


def config_from_args(args, base: TrainConfig | None = None) -> TrainConfig:
    base = base or TrainConfig()
    over = {
        "dimension": args.dim, "samples": args.samples, "finetune_samples": args.finetune_samples,
        "negatives": args.negatives, "rate": args.rate, "window": args.window,
        "noise_power": args.noise_power, "threads": args.threads, "seed": args.seed,
        "mode": args.mode, "dtype": args.dtype,
        "nets": None if args.nets is None else parse_nets(args.nets),
    }
    d = base.to_dict()
    d.update({k: v for k, v in over.items() if v is not None})
    return TrainConfig.from_dict(d)


def cmd_train(args) -> int:
    base = None
    manifest_in = None
    if args.from_manifest:
        _need_file(args.from_manifest, "manifest")
        manifest_in = RunManifest.load(args.from_manifest)
        base = TrainConfig.from_dict(manifest_in.config)
        args.network = args.network or manifest_in.network_dir
        args.output = args.output or manifest_in.outputs.get("embeddings")
        args.init_from = args.init_from or manifest_in.init_from
    if not args.network:
        raise UsageError("--network is required")
    if not args.output:
        raise UsageError("--output is required")
    try:
        config = config_from_args(args, base)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    net_dir = Path(args.network).resolve()
    for name in ("vocab.tsv", "meta.json"):
        _need_file(net_dir / name, f"network {name}")
    for kind in config.nets:
        _need_file(net_dir / f"{kind}.tsv", f"{kind} edge list")
    if args.init_from:
        _need_file(args.init_from, "checkpoint")
    _need_out_parent(args.output)
    inputs = {str(net_dir / f"{k}.tsv"): sha256(net_dir / f"{k}.tsv") for k in config.nets}
    inputs[str(net_dir / "vocab.tsv")] = sha256(net_dir / "vocab.tsv")
    if manifest_in is not None:
        for p, digest in manifest_in.inputs.items():
            if inputs.get(p) not in (None, digest):
                raise UsageError(f"input {p} changed since the manifest was written")

    timings = {}
    t0 = time.perf_counter()
    hetnet, vocab, label_names = load_network_dir(net_dir, config.nets)
    timings["load_network"] = time.perf_counter() - t0
    init = load_checkpoint(args.init_from, vocab, config.dtype) if args.init_from else None
    t0 = time.perf_counter()
    emb = train(hetnet, config, init)
    timings["train"] = time.perf_counter() - t0
    total = config.samples * len(config.nets)
    if config.mode == "pretrain_finetune":
        fine = config.samples if config.finetune_samples is None else config.finetune_samples
        total = config.samples * (len(config.nets) - 1) + fine
    timings["edge_samples_per_second"] = total / timings["train"] if timings["train"] > 0 else None

    output = Path(args.output).resolve()
    manifest_path = Path(args.manifest).resolve() if args.manifest else output.with_name(output.name + ".manifest.json")
    outputs = {"embeddings": str(output), "manifest": str(manifest_path)}
    if args.checkpoint:
        outputs["checkpoint"] = str(output)
    manifest = RunManifest(
        config=config.to_dict(), inputs=inputs, seed=config.seed, timings=timings,
        outputs=outputs, network_dir=str(net_dir),
        init_from=str(Path(args.init_from).resolve()) if args.init_from else None,
    )
    if args.checkpoint:
        save_checkpoint(output, emb, vocab, label_names)
    else:
        save_embeddings(output, emb, vocab)
    write_json(manifest_path, manifest.to_dict())
    print(f"trained {config.mode} on {','.join(config.nets)} in {timings['train']:.2f}s -> {output}")
    return EXIT_OK


# -- infer ---------------------------------------------------------------------


def cmd_infer(args) -> int:
    _need_file(args.embeddings, "embedding file")
    _need_file(args.text, "corpus file")
    _need_out_parent(args.output)
    vocab_ref = read_vocabulary(args.vocab) if args.vocab else None
    vocab, mat = load_word_vectors(args.embeddings, vocab_ref)
    docs = read_documents(args.text)
    rows = []
    for i, doc in enumerate(docs):
        dv = embed_text(doc, mat, vocab)
        if dv.empty:
            log.warning("document %d has no in-vocabulary token; writing a zero vector", i)
        rows.append(dv.vector)
    mat_out = np.vstack(rows) if rows else np.zeros((0, mat.shape[1]))
    write_vectors(args.output, range(len(docs)), mat_out, header=False)
    print(f"wrote {len(docs)} document vectors -> {args.output}")
    return EXIT_OK


# -- eval ----------------------------------------------------------------------


def _labeled_rows(vec_path, labels_path, require_all):
    names, X = read_vectors(vec_path, header=False)
    try:
        idx = [int(n) for n in names]
    except ValueError:
        raise CorpusError(f"{vec_path}: document names must be integers") from None
    if idx != list(range(len(idx))):
        raise CorpusError(f"{vec_path}: rows must be documents 0..n-1 in order")
    labels = read_labels(labels_path, len(idx))
    if require_all and len(labels) != len(idx):
        raise CorpusError(
            f"{labels_path} has {len(labels)} labels for {len(idx)} vectors in {vec_path}"
        )
    rows = sorted(labels)
    return X[rows], [labels[i] for i in rows], rows


def cmd_eval(args) -> int:
    if args.sweep:
        return _cmd_sweep(args)
    for p, what in (
        (args.train_vectors, "train vectors"), (args.train_labels, "train labels"),
        (args.test_vectors, "test vectors"), (args.test_labels, "test labels"),
    ):
        _need_file(p, what)
    for p in (args.predictions, args.report_json):
        if p:
            _need_out_parent(p)
    X_tr, y_tr, _ = _labeled_rows(args.train_vectors, args.train_labels, require_all=False)
    X_te, y_te, rows_te = _labeled_rows(args.test_vectors, args.test_labels, require_all=True)
    if X_tr.shape[1] != X_te.shape[1]:
        raise CorpusError("train and test vectors differ in dimension")
    names = sorted(set(y_tr) | set(y_te))
    index = {n: i for i, n in enumerate(names)}
    model = train_classifier(X_tr, np.array([index[y] for y in y_tr]), args.C)
    pred = predict(model, X_te)
    report = evaluate(pred, np.array([index[y] for y in y_te]), classes=np.arange(len(names)))
    print(report.to_text(names))
    if args.predictions:
        write_labels(args.predictions, ((i, names[p]) for i, p in zip(rows_te, pred)))
    if args.report_json:
        write_json(args.report_json, report.to_dict(names))
    return EXIT_OK


def _read_split(text, labels):
    docs = read_documents(text)
    lab = read_labels(labels, len(docs)) if labels else {}
    return LabeledSplit(docs, [lab.get(i) for i in range(len(docs))])


def _cmd_sweep(args) -> int:
    for p, what in ((args.text, "corpus file"), (args.labels, "labels file"),
                    (args.test_text, "test corpus"), (args.test_labels, "test labels")):
        _need_file(p, what)
    if not args.values:
        raise UsageError("--sweep needs --values")
    try:
        values = [float(v) for v in args.values.split(",")]
        config = config_from_args(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.sweep == "labeled-fraction" and not all(0 < v <= 1 for v in values):
        raise UsageError("labeled fractions must lie in (0, 1]")
    if args.output:
        _need_out_parent(args.output)
    train_split = _read_split(args.text, args.labels)
    test_split = _read_split(args.test_text, args.test_labels)
    if any(lab is None for lab in test_split.labels):
        raise CorpusError("every test document needs a label")
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow([args.sweep, "micro_f1", "macro_f1"])
        for x, micro, macro in sweep(train_split, test_split, config, args.sweep, values, C_reg=args.C):
            x_out = int(x) if args.sweep == "samples" else x
            writer.writerow([x_out, f"{micro:.6f}", f"{macro:.6f}"])
            fh.flush()
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="htext", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write the two-class synthetic corpus")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--n-train", type=int, default=400)
    s.add_argument("--n-test", type=int, default=400)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("build-network", help="build edge lists from a corpus")
    b.add_argument("--text", required=True)
    b.add_argument("--labels")
    b.add_argument("--nets", default="ww,wd,wl")
    b.add_argument("--window", type=int, default=5)
    b.add_argument("--min-count", type=int, default=1)
    b.add_argument("--out-dir", required=True)
    b.set_defaults(func=cmd_build_network)

    t = sub.add_parser("train", help="learn word embeddings from edge lists")
    t.add_argument("--network", help="directory written by build-network")
    t.add_argument("--output", help="word embedding file")
    t.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")
    t.add_argument("--from-manifest", help="rerun the configuration recorded in a manifest")
    t.add_argument("--checkpoint", action="store_true", help="also write context/doc/label sidecars")
    t.add_argument("--init-from", help="start from a checkpoint instead of random vectors")
    add_train_args(t, defaults=False)
    t.set_defaults(func=cmd_train)

    i = sub.add_parser("infer", help="average word vectors into document vectors")
    i.add_argument("--embeddings", required=True)
    i.add_argument("--text", required=True)
    i.add_argument("--output", required=True)
    i.add_argument("--vocab", help="vocabulary the embedding file must match")
    i.set_defaults(func=cmd_infer)

    e = sub.add_parser("eval", help="one-vs-rest logistic regression and F1 report")
    e.add_argument("--train-vectors")
    e.add_argument("--train-labels")
    e.add_argument("--test-vectors")
    e.add_argument("--test-labels")
    e.add_argument("--predictions", help="write doc_index<TAB>label predictions")
    e.add_argument("--report-json")
    e.add_argument("--C", type=float, default=1.0, help="inverse regularization strength")
    e.add_argument("--sweep", choices=["samples", "labeled-fraction"])
    e.add_argument("--values", help="comma list of sweep values")
    e.add_argument("--text", help="training corpus (sweep mode)")
    e.add_argument("--labels", help="training labels (sweep mode)")
    e.add_argument("--test-text", help="test corpus (sweep mode)")
    e.add_argument("--output", help="CSV output (sweep mode; default stdout)")
    add_train_args(e)
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"htext {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, ClassifierError, SamplingError, TrainingError, ValueError, OSError) as exc:
        print(f"htext {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
