import numpy as np
import pytest

from htext.corpus import CorpusError, Vocabulary
from htext.formats import (
    load_checkpoint,
    load_word_vectors,
    read_vectors,
    read_vocabulary,
    save_checkpoint,
    save_embeddings,
    write_vectors,
    write_vocabulary,
)
from htext.trainer import TrainConfig, initialize_tables


def test_embedding_file_layout_and_round_trip(tmp_path):
    vocab = Vocabulary(("a", "b", "c"), (3, 2, 1))
    emb = initialize_tables(TrainConfig(dimension=4, seed=2), (3, 2, 2))
    path = tmp_path / "emb.txt"
    save_embeddings(path, emb, vocab)
    lines = path.read_text().splitlines()
    assert lines[0] == "3 4"
    assert lines[1].split()[0] == "a" and len(lines[1].split()) == 5
    v2, mat = load_word_vectors(path, vocab)
    assert np.array_equal(mat.astype(np.float32), emb.word_target.vectors)


def test_checkpoint_round_trip(tmp_path):
    vocab = Vocabulary(("a", "b", "c"), (3, 2, 1))
    emb = initialize_tables(TrainConfig(dimension=4, seed=2), (3, 5, 0))
    path = tmp_path / "ck.txt"
    save_checkpoint(path, emb, vocab, label_names=())
    back = load_checkpoint(path, vocab)
    for a, b in zip(emb.tables(), back.tables()):
        assert a.vectors.shape == b.vectors.shape
        assert np.array_equal(a.vectors, b.vectors)


def test_vector_file_errors(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("2 2\na 1 2\n")
    with pytest.raises(CorpusError):
        read_vectors(p)
    p.write_text("1 2\na 1 2 3\n")
    with pytest.raises(CorpusError):
        read_vectors(p)
    p.write_text("1 2\nq 1 2\n")
    with pytest.raises(CorpusError):
        load_word_vectors(p, Vocabulary(("a",), (1,)))


def test_headerless_vectors(tmp_path):
    p = tmp_path / "d.txt"
    write_vectors(p, [0, 1], np.array([[0.5, 1.0], [0.0, 0.0]]), header=False)
    assert p.read_text().splitlines()[0] == "0 0.5 1"
    names, mat = read_vectors(p, header=False)
    assert names == ["0", "1"] and mat.shape == (2, 2)


def test_vocabulary_file(tmp_path):
    v = Vocabulary(("x", "y"), (4, 1))
    write_vocabulary(tmp_path / "v.tsv", v)
    assert read_vocabulary(tmp_path / "v.tsv") == v
