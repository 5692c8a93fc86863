"""Compiled inner loops: RNG, alias tables and the edge-sampling SGD update.

Everything here operates on plain numpy arrays so it can run under
``nogil`` from several threads at once (lock-free shared updates).
"""
import numpy as np
from numba import njit

SIGMOID_TABLE_SIZE = 1024
MAX_EXP = 6.0
GRAD_CLIP = 5.0
MAX_NEG_TRIES = 100

# status codes returned by the training loop
OK = 0
NON_FINITE = 1
NEG_EXHAUSTED = 2


def make_sigmoid_table(size=SIGMOID_TABLE_SIZE, max_exp=MAX_EXP):
    x = (np.arange(size) / size * 2.0 - 1.0) * max_exp
    return 1.0 / (1.0 + np.exp(-x))


@njit(cache=True)
def splitmix64(state):
    """Advance ``state[0]`` and return the next 64-bit output."""
    s = state[0] + np.uint64(0x9E3779B97F4A7C15)
    state[0] = s
    z = s
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def uniform01(state):
    return float(splitmix64(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def build_alias_arrays(weights):
    """Vose's alias method. Returns (prob, alias) with ``prob`` in [0, 1]."""
    n = weights.shape[0]
    total = 0.0
    for i in range(n):
        total += weights[i]
    scaled = np.empty(n)
    for i in range(n):
        scaled[i] = weights[i] * n / total
    prob = np.ones(n)
    alias = np.arange(n).astype(np.int64)
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    ns = 0
    nl = 0
    for i in range(n):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        l = large[nl - 1]
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            nl -= 1
            small[ns] = l
            ns += 1
    # leftovers are numerically ~1
    return prob, alias


@njit(cache=True)
def alias_draw(prob, alias, state):
    n = prob.shape[0]
    i = int(uniform01(state) * n)
    if i >= n:
        i = n - 1
    if uniform01(state) < prob[i]:
        return i
    return alias[i]


@njit(cache=True)
def draw_many(prob, alias, seed, count):
    state = np.array([np.uint64(seed)], dtype=np.uint64)
    out = np.empty(count, dtype=np.int64)
    for k in range(count):
        out[k] = alias_draw(prob, alias, state)
    return out


@njit(cache=True)
def fast_sigmoid(x, table):
    if x >= MAX_EXP:
        return 1.0
    if x <= -MAX_EXP:
        return 0.0
    n = table.shape[0]
    idx = int((x + MAX_EXP) * (n / (2.0 * MAX_EXP)))
    if idx >= n:
        idx = n - 1
    return table[idx]


@njit(cache=True)
def _clip(x, bound):
    if x > bound:
        return bound
    if x < -bound:
        return -bound
    return x


@njit(cache=True, nogil=True)
def edge_update(src_vec, word_table, targets, rho, sig_table, exact, clip, coef, grad):
    """One ascent step on log s(u_t.u_s) + sum_k log s(-u_nk.u_s).

    ``targets[0]`` is the positive word, the rest are negatives. All
    coefficients are computed at the current point before any vector moves,
    so the step equals ``rho`` times the true gradient (up to clipping and
    the sigmoid lookup). Returns False if a score was non-finite.
    """
    d = src_vec.shape[0]
    m = targets.shape[0]
    for k in range(m):
        t = targets[k]
        f = 0.0
        for c in range(d):
            f += word_table[t, c] * src_vec[c]
        if not np.isfinite(f):
            return False
        label = 1.0 if k == 0 else 0.0
        if exact:
            s = 1.0 / (1.0 + np.exp(-f))
        else:
            s = fast_sigmoid(f, sig_table)
        coef[k] = label - s
    for c in range(d):
        grad[c] = 0.0
    for k in range(m):
        t = targets[k]
        g = coef[k]
        for c in range(d):
            grad[c] += g * word_table[t, c]
    for k in range(m):
        t = targets[k]
        g = coef[k]
        for c in range(d):
            step = g * src_vec[c]
            if clip > 0.0:
                step = _clip(step, clip)
            word_table[t, c] += rho * step
    for c in range(d):
        step = grad[c]
        if clip > 0.0:
            step = _clip(step, clip)
        src_vec[c] += rho * step
    return True


@njit(cache=True, nogil=True)
def draw_negatives(targets, n_neg, positive, nprob, nalias, nids, state):
    """Fill ``targets[1:1+n_neg]`` with noise words != ``positive``."""
    for k in range(n_neg):
        tries = 0
        while True:
            w = nids[alias_draw(nprob, nalias, state)]
            if w != positive:
                break
            tries += 1
            if tries >= MAX_NEG_TRIES:
                return False
        targets[1 + k] = w
    return True


@njit(cache=True, nogil=True)
def train_loop(
    active,        # int64[n_active]: network slots to visit each iteration, in order
    e_src, e_tgt, e_prob, e_alias, e_off,   # concatenated edge alias tables, offsets per slot
    n_prob, n_alias, n_ids, n_off,          # concatenated noise alias tables, offsets per slot
    word_table, ctx_table, doc_table, label_table,
    n_iter, total_iter, rho0, n_neg, clip, exact, sig_table,
    state, progress, worker, n_workers, diag,
):
    """Run ``n_iter`` iterations; each iteration takes one edge step per active slot.

    ``progress[worker]`` counts finished iterations. With several workers the
    learning-rate clock is the sum of all progress entries, read without
    synchronization and refreshed every 1024 iterations. ``diag`` receives
    (iteration, slot, source, target) on failure.
    """
    d = word_table.shape[1]
    targets = np.empty(n_neg + 1, dtype=np.int64)
    coef = np.empty(n_neg + 1)
    grad = np.empty(d)
    floor = 1e-4
    others = 0
    for it in range(n_iter):
        if n_workers == 1:
            t = progress[worker]
        else:
            if it % 1024 == 0:
                others = 0
                for w in range(n_workers):
                    if w != worker:
                        others += progress[w]
            t = progress[worker] + others
        frac = 1.0 - t / total_iter
        if frac < floor:
            frac = floor
        rho = rho0 * frac
        for a in range(active.shape[0]):
            slot = active[a]
            e0 = e_off[slot]
            e1 = e_off[slot + 1]
            j = e0 + alias_draw(e_prob[e0:e1], e_alias[e0:e1], state)
            s = e_src[j]
            pos = e_tgt[j]
            targets[0] = pos
            n0 = n_off[slot]
            n1 = n_off[slot + 1]
            if n_neg > 0:
                if not draw_negatives(targets, n_neg, pos, n_prob[n0:n1], n_alias[n0:n1], n_ids[n0:n1], state):
                    diag[0] = it
                    diag[1] = slot
                    diag[2] = s
                    diag[3] = pos
                    return NEG_EXHAUSTED
            if slot == 0:
                src_vec = ctx_table[s]
            elif slot == 1:
                src_vec = doc_table[s]
            else:
                src_vec = label_table[s]
            if not edge_update(src_vec, word_table, targets, rho, sig_table, exact, clip, coef, grad):
                diag[0] = it
                diag[1] = slot
                diag[2] = s
                diag[3] = pos
                return NON_FINITE
        progress[worker] += 1
    return OK
