"""Constant-time weighted sampling of edges and negative words."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .textnet import BipartiteNetwork

DEFAULT_NOISE_POWER = 0.75


class SamplingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AliasTable:
    prob: np.ndarray
    alias: np.ndarray

    @property
    def n(self) -> int:
        return len(self.prob)

    def draw(self, rng: np.random.Generator, size: int | None = None):
        """Draw one index (or ``size`` indices) using ``rng``."""
        m = 1 if size is None else size
        i = rng.integers(0, self.n, size=m)
        coin = rng.random(m)
        out = np.where(coin < self.prob[i], i, self.alias[i])
        return int(out[0]) if size is None else out

    def probabilities(self) -> np.ndarray:
        """Exact sampling distribution implied by the table cells."""
        p = self.prob.copy()
        np.add.at(p, self.alias, 1.0 - self.prob)
        return p / self.n


def build_alias(weights) -> AliasTable:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) == 0:
        raise SamplingError("alias table needs a nonempty 1-D weight vector")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise SamplingError("alias weights must be finite and positive")
    prob, alias = _kernels.build_alias_arrays(w)
    return AliasTable(prob, alias)


@dataclass(frozen=True, eq=False)
class NoiseDistribution:
    """Noise over words proportional to ``degree ** power``.

    Only words with positive degree are in the support; ``ids`` maps alias
    cells back to word ids.
    """

    ids: np.ndarray
    mass: np.ndarray
    table: AliasTable
    power: float

    @classmethod
    def from_degrees(cls, degrees, power: float = DEFAULT_NOISE_POWER) -> "NoiseDistribution":
        degrees = np.asarray(degrees, dtype=np.float64)
        ids = np.flatnonzero(degrees > 0)
        if len(ids) == 0:
            raise SamplingError("noise distribution has no positive-degree vertex")
        mass = degrees[ids] ** power
        return cls(ids, mass, build_alias(mass), power)

    @classmethod
    def for_network(cls, net: BipartiteNetwork, power: float = DEFAULT_NOISE_POWER):
        return cls.from_degrees(net.word_degrees, power)

    def probabilities(self, n_words: int) -> np.ndarray:
        p = np.zeros(n_words)
        p[self.ids] = self.mass / self.mass.sum()
        return p


def edge_table(net: BipartiteNetwork) -> AliasTable:
    if len(net) == 0:
        raise SamplingError(f"cannot sample from empty {net.kind} network")
    return build_alias(net.weight)


def sample_edge(net: BipartiteNetwork, rng: np.random.Generator, table: AliasTable | None = None):
    """Return ``(source_id, target_id)`` with probability proportional to its weight."""
    table = table or edge_table(net)
    j = table.draw(rng)
    return int(net.source[j]), int(net.target[j])


def sample_negative(noise: NoiseDistribution, exclude: int | None, rng: np.random.Generator) -> int:
    """Draw a noise word different from ``exclude`` by rejection."""
    if len(noise.ids) < 2:
        raise SamplingError("negative sampling needs at least two positive-degree words")
    for _ in range(_kernels.MAX_NEG_TRIES):
        w = int(noise.ids[noise.table.draw(rng)])
        if w != exclude:
            return w
    raise SamplingError(f"no negative distinct from {exclude} after {_kernels.MAX_NEG_TRIES} draws")
