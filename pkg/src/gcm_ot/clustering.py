"""Effective-precision clusters and cluster distributions.

Two elements belong to the same cluster when their values agree after
truncation to the grid ``delta * floor(x / delta)``. The effective dimension
of a state is its number of such clusters.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from gcm_ot.dynamics import SystemState


def _values(state) -> np.ndarray:
    if isinstance(state, SystemState):
        return state.values
    return np.asarray(state, dtype=np.float64)


@dataclass(frozen=True)
class ClusteringPattern:
    """Cluster sizes, sorted descending, summing to ``n_total``."""

    sizes: tuple[int, ...]
    n_total: int

    def __post_init__(self) -> None:
        sizes = tuple(sorted((int(s) for s in self.sizes), reverse=True))
        if not sizes:
            raise ValueError("a clustering pattern needs at least one cluster")
        if sizes[-1] < 1:
            raise ValueError("cluster sizes must be positive")
        if sum(sizes) != self.n_total:
            raise ValueError(f"cluster sizes sum to {sum(sizes)}, expected {self.n_total}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def from_sizes(cls, sizes: Iterable[int]) -> "ClusteringPattern":
        sizes = tuple(sizes)
        return cls(sizes, sum(sizes))

    @property
    def k(self) -> int:
        return len(self.sizes)

    def multiplicities(self) -> np.ndarray:
        """``m[i]`` = number of clusters of size ``i``; index 0 unused."""
        m = np.zeros(self.n_total + 1, dtype=np.int64)
        for s in self.sizes:
            m[s] += 1
        return m

    def __str__(self) -> str:
        parts = []
        for size, count in sorted(Counter(self.sizes).items(), reverse=True):
            parts.append(str(size) if count == 1 else f"{size}^{count}")
        return " ".join(parts)


@dataclass(frozen=True)
class ClusterDistribution:
    """Probability vector over cluster sizes; ``mass[i-1]`` belongs to size ``i``."""

    mass: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mass, dtype=np.float64)
        if m.ndim != 1 or m.size == 0:
            raise ValueError("mass must be a nonempty vector")
        if np.any(m < 0):
            raise ValueError("mass must be nonnegative")
        object.__setattr__(self, "mass", m)

    @property
    def n(self) -> int:
        return self.mass.size

    def to_pattern(self) -> ClusteringPattern:
        """Recover the size multiset; exact for masses on the 1/N lattice."""
        n = self.n
        sizes: list[int] = []
        for i, p in enumerate(self.mass, start=1):
            total = round(p * n)
            if total == 0:
                continue
            count, rem = divmod(total, i)
            if rem:
                raise ValueError(f"mass at size {i} is not a multiple of {i}/{n}")
            sizes.extend([i] * count)
        return ClusteringPattern(tuple(sizes), n)


def quantize(state, delta: float) -> np.ndarray:
    if not delta > 0:
        raise ValueError("delta must be positive")
    return delta * np.floor(_values(state) / delta)


def _bins(x: np.ndarray, delta: float) -> np.ndarray:
    # Integer grid labels; equal labels <=> equal quantized values.
    return np.floor(x / delta)


def cluster_pattern(state, delta: float) -> ClusteringPattern:
    x = _values(state)
    if not delta > 0:
        raise ValueError("delta must be positive")
    _, counts = np.unique(_bins(x, delta), return_counts=True)
    return ClusteringPattern(tuple(counts.tolist()), x.size)


def effective_dimension(state, delta: float) -> int:
    x = _values(state)
    if not delta > 0:
        raise ValueError("delta must be positive")
    return int(np.unique(_bins(x, delta)).size)


def cluster_distribution(pattern: ClusteringPattern) -> ClusterDistribution:
    n = pattern.n_total
    sizes = np.arange(n + 1)
    mass = (sizes * pattern.multiplicities())[1:] / n
    return ClusterDistribution(mass)


def size_mass_batch(x: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Cluster statistics for a batch of states at once.

    ``x`` has shape ``(M, N)``. Returns the effective dimension of each row and
    an integer ``(M, N)`` array whose entry ``[r, i-1]`` is the number of
    elements of row ``r`` sitting in clusters of size ``i``, i.e. ``N`` times
    the cluster distribution.
    """
    x = np.atleast_2d(x)
    m, n = x.shape
    q = np.sort(_bins(x, delta), axis=1)
    starts = np.ones((m, n), dtype=bool)
    starts[:, 1:] = q[:, 1:] != q[:, :-1]
    ed = starts.sum(axis=1)
    # Run lengths from the positions of run starts, row by row in flat index space.
    flat_starts = np.flatnonzero(starts)
    rows = flat_starts // n
    bounds = np.append(flat_starts, m * n)
    lengths = np.diff(bounds)
    # A run never crosses a row boundary because every row starts a run.
    counts = np.bincount(rows * (n + 1) + lengths, weights=lengths, minlength=m * (n + 1))
    return ed, counts.reshape(m, n + 1)[:, 1:].astype(np.int64)
