import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from htext import _kernels
from htext.sampler import (
    NoiseDistribution,
    SamplingError,
    build_alias,
    sample_edge,
    sample_negative,
)
from htext.textnet import BipartiteNetwork


def cell_distribution(table):
    p = np.zeros(table.n)
    for cell in range(table.n):
        p[cell] += table.prob[cell] / table.n
        p[table.alias[cell]] += (1.0 - table.prob[cell]) / table.n
    return p


def test_single_weight_always_zero(rng):
    t = build_alias([1.0])
    assert set(t.draw(rng, 100).tolist()) == {0}


def test_equal_weights_half():
    np.testing.assert_allclose(cell_distribution(build_alias([1, 1])), [0.5, 0.5], rtol=1e-12)


def test_alias_chi_square_1_3(rng):
    t = build_alias([1, 3])
    counts = np.bincount(t.draw(rng, 100_000), minlength=2)
    assert chisquare(counts, 100_000 * np.array([0.25, 0.75])).pvalue > 0.01


@pytest.mark.parametrize("bad", [[], [0.0, 1.0], [-1.0], [np.inf], [[1.0]]])
def test_alias_rejects_bad_weights(bad):
    with pytest.raises(SamplingError):
        build_alias(bad)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=10))
def test_alias_cells_reproduce_weights(weights):
    w = np.array(weights)
    t = build_alias(w)
    assert np.all((t.prob >= 0) & (t.prob <= 1))
    expected = w / w.sum()
    assert np.max(np.abs(cell_distribution(t) - expected) / expected) < 1e-9


def net_of(weights):
    n = len(weights)
    return BipartiteNetwork("wd", np.zeros(n, dtype=np.int64), np.arange(n), np.array(weights, float), n, 1)


def test_sample_edge_single(rng):
    net = BipartiteNetwork("wd", np.array([2]), np.array([1]), np.array([4.0]), 3, 3)
    assert {sample_edge(net, rng) for _ in range(50)} == {(2, 1)}


def test_sample_edge_chi_square(rng):
    net = net_of([1, 2, 3])
    draws = [sample_edge(net, rng)[1] for _ in range(60_000)]
    counts = np.bincount(draws, minlength=3)
    assert chisquare(counts, 60_000 * np.array([1, 2, 3]) / 6).pvalue > 0.01


def test_sample_edge_empty(rng):
    with pytest.raises(SamplingError):
        sample_edge(BipartiteNetwork.empty("wd", 3, 1), rng)


def test_noise_probabilities():
    np.testing.assert_allclose(NoiseDistribution.from_degrees([1, 3], power=1.0).probabilities(2), [0.25, 0.75])
    np.testing.assert_allclose(NoiseDistribution.from_degrees([1, 16], power=0.75).probabilities(2), [1 / 9, 8 / 9])


def test_noise_zero_degree_never_sampled(rng):
    noise = NoiseDistribution.from_degrees([0, 2, 0, 5])
    draws = {sample_negative(noise, None, rng) for _ in range(2000)}
    assert draws == {1, 3}


def test_negative_excludes(rng):
    noise = NoiseDistribution.from_degrees([1, 1])
    assert {sample_negative(noise, 0, rng) for _ in range(100)} == {1}


def test_negative_degenerate(rng):
    with pytest.raises(SamplingError):
        sample_negative(NoiseDistribution.from_degrees([0, 4]), None, rng)
    with pytest.raises(SamplingError):
        NoiseDistribution.from_degrees([0, 0])


def test_negative_chi_square_power(rng):
    degs = np.array([1.0, 16.0, 3.0, 7.0])
    noise = NoiseDistribution.from_degrees(degs, 0.75)
    draws = [sample_negative(noise, None, rng) for _ in range(60_000)]
    expected = degs**0.75 / (degs**0.75).sum()
    assert chisquare(np.bincount(draws, minlength=4), 60_000 * expected).pvalue > 0.01


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 3))
def test_negative_never_returns_excluded(seed, exclude):
    noise = NoiseDistribution.from_degrees([1.0, 5.0, 2.0, 9.0])
    r = np.random.default_rng(seed)
    assert all(sample_negative(noise, exclude, r) != exclude for _ in range(50))


def test_fixed_seed_deterministic():
    t = build_alias([1, 2, 3, 4])
    a = t.draw(np.random.default_rng(7), 1000)
    b = t.draw(np.random.default_rng(7), 1000)
    assert np.array_equal(a, b)
    k1 = _kernels.draw_many(t.prob, t.alias, 99, 1000)
    k2 = _kernels.draw_many(t.prob, t.alias, 99, 1000)
    assert np.array_equal(k1, k2)


def test_compiled_draws_chi_square():
    t = build_alias([1, 2, 3])
    counts = np.bincount(_kernels.draw_many(t.prob, t.alias, 2024, 60_000), minlength=3)
    assert chisquare(counts, 60_000 * np.array([1, 2, 3]) / 6).pvalue > 0.01


def test_splitmix_uniform_range():
    state = np.array([123], dtype=np.uint64)
    xs = np.array([_kernels.uniform01(state) for _ in range(10_000)])
    assert xs.min() >= 0 and xs.max() < 1
    assert abs(xs.mean() - 0.5) < 0.02
