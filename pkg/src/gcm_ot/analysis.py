"""Statistics derived from GCM trajectories.

The OT series compares the cluster distributions of consecutive steps, so
``d[n] == 0`` exactly when the clustering pattern does not change between
``n`` and ``n + 1``. Attractor-ruin strength is the Shannon entropy of the
effective dimensions seen at those zero-distance steps.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from gcm_ot.clustering import size_mass_batch
from gcm_ot.dynamics import GcmParams, Trajectory, iterate, make_initial
from gcm_ot.transport import w1_counts

COHERENT = "coherent"
ORDERED = "ordered"
PARTIALLY_ORDERED = "partially-ordered"
TURBULENT = "turbulent"
UNCLASSIFIED = "unclassified"


@dataclass
class RuinStatistics:
    zero_time_count: int
    ed_histogram: dict[int, float]
    entropy: float


@dataclass
class EnsembleRun:
    """Per-seed summaries for one parameter point."""

    params: GcmParams
    init_seeds: list[int]
    ot_time_avg: np.ndarray
    ruin: list[RuinStatistics]
    final_ed: np.ndarray
    ed_window_distinct: np.ndarray = field(repr=False)

    @property
    def ruin_entropy(self) -> np.ndarray:
        return np.array([r.entropy for r in self.ruin])

    @property
    def modal_final_ed(self) -> int:
        return modal_value(self.final_ed)


def _series_from_states(states: Iterable[np.ndarray], delta: float) -> tuple[np.ndarray, np.ndarray]:
    # Works on single states (N,) or batches (M, N); returns (ed, d) with time on the last axis.
    eds, dists = [], []
    prev = None
    for x in states:
        ed, counts = size_mass_batch(x, delta)
        eds.append(ed)
        if prev is not None:
            dists.append(w1_counts(prev, counts))
        prev = counts
    if not eds:
        raise ValueError("trajectory is empty")
    ed = np.stack(eds, axis=-1)
    d = np.stack(dists, axis=-1) if dists else np.zeros((ed.shape[0], 0))
    return ed, d


def _states(trajectory) -> Iterable[np.ndarray]:
    if isinstance(trajectory, Trajectory):
        return trajectory.values
    return trajectory


def ot_series(trajectory, delta: float) -> np.ndarray:
    """``d[n]`` = W1 between the cluster distributions at steps ``n`` and ``n+1``."""
    _, d = _series_from_states(_states(trajectory), delta)
    if d.shape[-1] < 1:
        raise ValueError("need at least two states")
    return d[0]


def ed_series(trajectory, delta: float) -> np.ndarray:
    ed, _ = _series_from_states(_states(trajectory), delta)
    return ed[0]


def time_average(series: Sequence[float], transient: int, window: int) -> float:
    s = np.asarray(series, dtype=np.float64)
    if transient < 0 or window < 1 or transient + window > s.size:
        raise IndexError(f"window [{transient}, {transient + window}) outside series of length {s.size}")
    return float(s[transient:transient + window].mean())


def shannon_entropy(hist: Mapping[object, float] | Sequence[float], base: float = 2.0) -> float:
    """``-sum p log p`` over the nonzero probabilities, in units of ``log(base)``."""
    probs = np.asarray(list(hist.values()) if isinstance(hist, Mapping) else hist, dtype=np.float64)
    if np.any(probs < 0):
        raise ValueError("probabilities must be nonnegative")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
    p = probs[probs > 0]
    h = -float(np.sum(p * np.log(p))) / math.log(base)
    return h if h > 0 else 0.0


def _ruin_from_series(ed: np.ndarray, d: np.ndarray, transient: int, window: int, base: float) -> RuinStatistics:
    if transient < 0 or window < 1 or transient + window > d.size:
        raise IndexError(f"window [{transient}, {transient + window}) needs {transient + window + 1} states")
    lo, hi = transient, transient + window
    zero = d[lo:hi] == 0.0
    picked = ed[lo:hi][zero]
    if picked.size == 0:
        return RuinStatistics(0, {}, 0.0)
    counts = Counter(picked.tolist())
    total = picked.size
    hist = {int(k): v / total for k, v in sorted(counts.items())}
    return RuinStatistics(int(total), hist, shannon_entropy(hist, base))


def ruin_strength(trajectory, delta: float, transient: int, window: int, base: float = 2.0) -> RuinStatistics:
    """Entropy of the effective dimension over the zero-distance steps of the window."""
    ed, d = _series_from_states(_states(trajectory), delta)
    return _ruin_from_series(ed[0], d[0], transient, window, base)


def modal_value(values: Sequence[int]) -> int:
    """Most common value; ties go to the smallest."""
    counts = Counter(int(v) for v in values)
    top = max(counts.values())
    return min(v for v, c in counts.items() if c == top)


def classify_phase(ot_avg: float, modal_ed: int, n: int) -> str:
    """Heuristic phase label for a parameter point.

    Fluctuating patterns (positive OT average) are partially ordered. A frozen
    pattern is coherent at one cluster, ordered up to ``0.2 n`` clusters and
    turbulent from ``0.9 n``; anything in between is left unclassified.
    """
    if ot_avg > 0:
        return PARTIALLY_ORDERED
    if modal_ed == 1:
        return COHERENT
    if 2 <= modal_ed <= 0.2 * n:
        return ORDERED
    if modal_ed >= 0.9 * n:
        return TURBULENT
    return UNCLASSIFIED


def run_ensemble(
    params: GcmParams,
    n_init: int,
    total_steps: int,
    transient: int,
    window: int,
    ruin_window: int | None = None,
    entropy_base: float = 2.0,
) -> EnsembleRun:
    """Evolve ``n_init`` initial conditions side by side and summarize each.

    Seeds are ``params.init_seed + r`` for ``r < n_init``, all sharing
    ``params.noise_seed``. The OT average uses ``[transient, transient+window)``
    and the ruin statistics ``[transient, transient+ruin_window)`` of the same
    trajectories (``ruin_window`` defaults to ``window``).
    """
    if n_init < 1:
        raise ValueError("n_init must be at least 1")
    ruin_window = window if ruin_window is None else ruin_window
    if transient + max(window, ruin_window) > total_steps:
        raise IndexError("analysis windows extend past the end of the trajectory")
    seeds = [params.init_seed + r for r in range(n_init)]
    x0 = np.stack([make_initial(s, params.n_elements).values for s in seeds])
    ed, d = _series_from_states(iterate(params, total_steps, x0), params.delta)

    ot_avg = np.array([time_average(row, transient, window) for row in d])
    ruin = [_ruin_from_series(ed[r], d[r], transient, ruin_window, entropy_base) for r in range(n_init)]
    distinct = np.array([np.unique(row[transient:transient + window + 1]).size for row in ed])
    return EnsembleRun(params, seeds, ot_avg, ruin, ed[:, -1].copy(), distinct)


def ensemble_average(
    params: GcmParams,
    n_init: int,
    transient: int,
    window: int,
    total_steps: int | None = None,
) -> float:
    """Mean over initial conditions of the time-averaged OT distance."""
    steps = transient + window if total_steps is None else total_steps
    run = run_ensemble(params, n_init, steps, transient, window)
    # Fixed-order summation keeps the result reproducible.
    return math.fsum(run.ot_time_avg.tolist()) / n_init
