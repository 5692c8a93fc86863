import csv
import json
import logging

import numpy as np
import pytest

from htext.cli import main
from htext.corpus import build_vocabulary, load_corpus, read_documents
from htext.formats import load_word_vectors, read_vectors
from htext.inference import embed_text
from htext.textnet import read_edge_list
from htext.trainer import TrainConfig, initialize_tables

from oracles import brute_force_networks

DOCS = ["a b c a", "b c d", "d e f e", "a c", "e f f", "x"]
LABELS = {0: "pos", 1: "pos", 2: "neg", 4: "neg"}


@pytest.fixture
def data(tmp_path):
    (tmp_path / "docs.txt").write_text("\n".join(DOCS) + "\n")
    (tmp_path / "labels.tsv").write_text("".join(f"{i}\t{l}\n" for i, l in LABELS.items()))
    return tmp_path


def build(data, *extra):
    return main([
        "build-network", "--text", str(data / "docs.txt"), "--labels", str(data / "labels.tsv"),
        "--out-dir", str(data / "net"), *extra,
    ])


def test_build_network_writes_oracle_edges(data):
    assert build(data, "--nets", "ww,wd,wl", "--window", "5") == 0
    net_dir = data / "net"
    assert {p.name for p in net_dir.iterdir()} >= {"vocab.tsv", "ww.tsv", "wd.tsv", "wl.tsv", "meta.json"}
    vocab = build_vocabulary(read_documents(data / "docs.txt"))
    corpus = load_corpus(data / "docs.txt", data / "labels.tsv", vocab)
    expected = brute_force_networks(corpus.documents, corpus.labels, 5)
    for kind, ref in zip(("ww", "wd", "wl"), expected):
        net, _ = read_edge_list(net_dir / f"{kind}.tsv", vocab, len(corpus), corpus.label_names)
        assert net.as_dict() == ref


def test_wl_without_labels_is_usage_error(data, capsys):
    rc = main(["build-network", "--text", str(data / "docs.txt"), "--nets", "wl", "--out-dir", str(data / "net")])
    assert rc == 1
    assert "requires --labels" in capsys.readouterr().err
    assert not (data / "net").exists()


def test_window_zero_is_validation_error(data):
    assert build(data, "--window", "0") == 1
    assert not (data / "net").exists()


def test_unknown_flag_exit_code(data):
    with pytest.raises(SystemExit) as exc:
        main(["build-network", "--bogus"])
    assert exc.value.code == 1


def train(data, out, *extra):
    return main(["train", "--network", str(data / "net"), "--output", str(out), *extra])


def test_train_unsupervised_wd(data):
    build(data)
    out = data / "emb.txt"
    rc = train(data, out, "--nets", "wd", "--mode", "unsupervised", "--dim", "16",
               "--samples", "20000", "--negatives", "5", "--rate", "0.025")
    assert rc == 0
    vocab, mat = load_word_vectors(out)
    assert mat.shape == (len(vocab), 16)
    manifest = json.loads((data / "emb.txt.manifest.json").read_text())
    assert manifest["config"]["nets"] == ["wd"] and manifest["config"]["mode"] == "unsupervised"
    assert manifest["seed"] == 1 and "train" in manifest["timings"]
    assert all(len(h) == 64 for h in manifest["inputs"].values())


def test_zero_samples_writes_initialization(data):
    build(data)
    out = data / "emb.txt"
    assert train(data, out, "--samples", "0", "--dim", "8", "--seed", "3") == 0
    vocab, mat = load_word_vectors(out)
    init = initialize_tables(TrainConfig(dimension=8, seed=3), (len(vocab), len(DOCS), 2))
    assert np.array_equal(mat.astype(np.float32), init.word_target.vectors)


def test_train_twice_byte_identical_and_manifest_rerun(data):
    build(data)
    args = ("--dim", "8", "--samples", "5000", "--seed", "7", "--threads", "1")
    assert train(data, data / "e1.txt", *args) == 0
    assert train(data, data / "e2.txt", *args) == 0
    assert (data / "e1.txt").read_bytes() == (data / "e2.txt").read_bytes()
    rc = main(["train", "--from-manifest", str(data / "e1.txt.manifest.json"), "--output", str(data / "e3.txt")])
    assert rc == 0
    assert (data / "e3.txt").read_bytes() == (data / "e1.txt").read_bytes()


def test_manifest_detects_changed_inputs(data):
    build(data)
    assert train(data, data / "e1.txt", "--dim", "4", "--samples", "10") == 0
    with open(data / "net" / "wd.tsv", "a") as fh:
        fh.write("wd\td5\ta\t1\n")
    rc = main(["train", "--from-manifest", str(data / "e1.txt.manifest.json"), "--output", str(data / "e3.txt")])
    assert rc == 1 and not (data / "e3.txt").exists()


def test_train_missing_network_file(data):
    main(["build-network", "--text", str(data / "docs.txt"), "--nets", "wd", "--out-dir", str(data / "net")])
    assert train(data, data / "e.txt", "--nets", "ww,wd", "--mode", "unsupervised") == 1
    assert not (data / "e.txt").exists()


def test_train_empty_required_network(data):
    (data / "one.txt").write_text("a\nb\n")
    main(["build-network", "--text", str(data / "one.txt"), "--nets", "ww,wd", "--out-dir", str(data / "net")])
    rc = train(data, data / "e.txt", "--nets", "ww,wd", "--mode", "unsupervised", "--samples", "10")
    assert rc == 2 and not (data / "e.txt").exists()


def test_bad_config_is_validation_error(data):
    build(data)
    assert train(data, data / "e.txt", "--mode", "unsupervised", "--nets", "wl") == 1
    assert train(data, data / "e.txt", "--dim", "0") == 1


def test_checkpoint_and_finetune_handoff(data):
    build(data)
    ck = data / "ck.txt"
    assert train(data, ck, "--nets", "ww,wd", "--mode", "unsupervised", "--dim", "8",
                 "--samples", "2000", "--checkpoint") == 0
    for suffix in (".context", ".doc", ".label"):
        assert (data / f"ck.txt{suffix}").is_file()
    assert train(data, data / "ft.txt", "--nets", "wl", "--dim", "8", "--samples", "2000",
                 "--init-from", str(ck)) == 0
    _, a = load_word_vectors(ck)
    _, b = load_word_vectors(data / "ft.txt")
    assert a.shape == b.shape and not np.array_equal(a, b)


def test_pretrain_finetune_mode(data):
    build(data)
    assert train(data, data / "e.txt", "--mode", "pretrain-finetune", "--dim", "8", "--samples", "1000") == 0


def test_infer(data, caplog):
    build(data)
    train(data, data / "emb.txt", "--dim", "6", "--samples", "2000")
    (data / "new.txt").write_text("a b zz\nqq rr\n")
    with caplog.at_level(logging.WARNING):
        assert main(["infer", "--embeddings", str(data / "emb.txt"), "--text", str(data / "new.txt"),
                     "--output", str(data / "vec.txt")]) == 0
    assert "document 1 has no in-vocabulary token" in caplog.text
    names, X = read_vectors(data / "vec.txt", header=False)
    assert names == ["0", "1"]
    vocab, W = load_word_vectors(data / "emb.txt")
    np.testing.assert_allclose(X[0], embed_text("a b zz", W, vocab).vector, rtol=1e-8, atol=1e-12)
    assert not X[1].any()


def test_infer_vocab_mismatch(data):
    build(data)
    train(data, data / "emb.txt", "--dim", "6", "--samples", "100")
    (data / "other_vocab.tsv").write_text("a\t1\nzz\t1\n")
    rc = main(["infer", "--embeddings", str(data / "emb.txt"), "--text", str(data / "docs.txt"),
               "--output", str(data / "v.txt"), "--vocab", str(data / "other_vocab.tsv")])
    assert rc == 2


def write_vecs(path, X):
    path.write_text("".join(f"{i} " + " ".join(map(str, row)) + "\n" for i, row in enumerate(X)))


def test_eval_perfect_fixture(data, capsys):
    X = np.array([[1.0, 0], [2.0, 0], [0, 1.0], [0, 2.0]])
    write_vecs(data / "tr.vec", X)
    write_vecs(data / "te.vec", X)
    (data / "y.tsv").write_text("0\ta\n1\ta\n2\tb\n3\tb\n")
    rc = main(["eval", "--train-vectors", str(data / "tr.vec"), "--train-labels", str(data / "y.tsv"),
               "--test-vectors", str(data / "te.vec"), "--test-labels", str(data / "y.tsv"),
               "--predictions", str(data / "pred.tsv"), "--report-json", str(data / "r.json")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "micro_f1=1.000000" in out and "macro_f1=1.000000" in out
    assert (data / "pred.tsv").read_text().splitlines() == ["0\ta", "1\ta", "2\tb", "3\tb"]
    assert json.loads((data / "r.json").read_text())["micro_f1"] == 1.0


def test_eval_length_mismatch(data):
    write_vecs(data / "tr.vec", np.eye(2))
    write_vecs(data / "te.vec", np.eye(2))
    (data / "y.tsv").write_text("0\ta\n1\tb\n2\tb\n")
    rc = main(["eval", "--train-vectors", str(data / "tr.vec"), "--train-labels", str(data / "y.tsv"),
               "--test-vectors", str(data / "te.vec"), "--test-labels", str(data / "y.tsv")])
    assert rc == 2
    (data / "y1.tsv").write_text("0\ta\n")
    rc = main(["eval", "--train-vectors", str(data / "tr.vec"), "--train-labels", str(data / "y.tsv"),
               "--test-vectors", str(data / "te.vec"), "--test-labels", str(data / "y1.tsv")])
    assert rc == 2


def test_eval_sweep_csv(tmp_path):
    assert main(["synth", "--out-dir", str(tmp_path / "s"), "--n-train", "60", "--n-test", "40"]) == 0
    s = tmp_path / "s"
    rc = main(["eval", "--sweep", "labeled-fraction", "--values", "0.1,1.0",
               "--text", str(s / "train.txt"), "--labels", str(s / "train_labels.tsv"),
               "--test-text", str(s / "test.txt"), "--test-labels", str(s / "test_labels.tsv"),
               "--dim", "8", "--samples", "5000", "--output", str(tmp_path / "sweep.csv")])
    assert rc == 0
    rows = list(csv.reader(open(tmp_path / "sweep.csv")))
    assert rows[0] == ["labeled-fraction", "micro_f1", "macro_f1"]
    assert len(rows) == 3 and all(0 <= float(r[1]) <= 1 for r in rows[1:])


def test_eval_sweep_validation(tmp_path):
    assert main(["eval", "--sweep", "samples", "--values", "10"]) == 1
