import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from htext.corpus import Corpus, build_vocabulary


def make_corpus(docs, labels=None, min_count=1):
    vocab = build_vocabulary(docs, min_count)
    return Corpus.from_tokens(docs, vocab, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
