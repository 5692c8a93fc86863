"""Independent reference computations used by the tests.

Nothing here imports the code under test.
"""
import math
from collections import defaultdict

import numpy as np


def brute_force_networks(documents, labels, window):
    """O(n^2) enumeration of every position pair, per document.

    Returns three dicts ``{(source, target): weight}`` for ww, wd and wl.
    """
    ww = defaultdict(float)
    wd = defaultdict(float)
    wl = defaultdict(float)
    for d, doc in enumerate(documents):
        n = len(doc)
        for p in range(n):
            for q in range(n):
                if p != q and abs(p - q) <= window:
                    ww[(doc[p], doc[q])] += 1.0
            wd[(d, doc[p])] += 1.0
            if labels[d] is not None:
                wl[(labels[d], doc[p])] += 1.0
    return dict(ww), dict(wd), dict(wl)


def log_sigmoid(x):
    return -math.log1p(math.exp(-x)) if x >= 0 else x - math.log1p(math.exp(x))


def edge_loss(src, pos, negs):
    """Negative-sampling log-likelihood for one edge, in exact arithmetic."""
    val = log_sigmoid(float(np.dot(pos, src)))
    for v in negs:
        val += log_sigmoid(-float(np.dot(v, src)))
    return val


def finite_difference_grads(src, word_table, targets, h=1e-5):
    """Central differences of ``edge_loss`` w.r.t. the source vector and every word row."""

    def f(s, W):
        return edge_loss(s, W[targets[0]], [W[t] for t in targets[1:]])

    g_src = np.zeros_like(src)
    for c in range(len(src)):
        up, dn = src.copy(), src.copy()
        up[c] += h
        dn[c] -= h
        g_src[c] = (f(up, word_table) - f(dn, word_table)) / (2 * h)
    g_words = np.zeros_like(word_table)
    for t in set(targets):
        for c in range(word_table.shape[1]):
            up, dn = word_table.copy(), word_table.copy()
            up[t, c] += h
            dn[t, c] -= h
            g_words[t, c] = (f(src, up) - f(src, dn)) / (2 * h)
    return g_src, g_words


def softmax_objective(pairs, src_table, word_table):
    """``-sum w log softmax`` evaluated with explicit loops."""
    total = 0.0
    for (s, t), w in pairs.items():
        scores = [float(np.dot(word_table[i], src_table[s])) for i in range(len(word_table))]
        m = max(scores)
        log_z = m + math.log(sum(math.exp(x - m) for x in scores))
        total -= w * (scores[t] - log_z)
    return total


def gradient_descent_mean(points, steps=20000, lr=None):
    """Minimize sum_i ||u_i - d||^2 by plain gradient descent from the origin."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    lr = lr or 0.25 / n
    d = np.zeros(points.shape[1])
    for _ in range(steps):
        grad = 2.0 * (n * d - points.sum(axis=0))
        if np.max(np.abs(grad)) < 1e-14:
            break
        d -= lr * grad
    return d
