"""Semi-supervised text embeddings learned from a heterogeneous word network.

Words are tied to context words, documents and class labels through three
bipartite co-occurrence networks; word vectors are trained by edge sampling
with negative sampling and documents are embedded as word-vector averages.
"""

__version__ = "0.1.0"
