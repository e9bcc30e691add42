"""Discrete optimal transport between distributions over cluster sizes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from gcm_ot.clustering import ClusterDistribution

MARGINAL_TOL = 1e-9


class InfeasibleTransport(ValueError):
    """Source and target masses cannot be matched."""


@dataclass(frozen=True)
class CostMatrix:
    entries: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.entries, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("cost matrix must be square")
        if np.any(c < 0):
            raise ValueError("costs must be nonnegative")
        object.__setattr__(self, "entries", c)


@dataclass(frozen=True)
class TransportPlan:
    entries: np.ndarray
    cost: float


def default_cost(n: int) -> CostMatrix:
    """``|i - j|`` between cluster sizes ``i, j = 1..n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    idx = np.arange(1, n + 1)
    return CostMatrix(np.abs(idx[:, None] - idx[None, :]).astype(np.float64))


def _mass(d) -> np.ndarray:
    return d.mass if isinstance(d, ClusterDistribution) else np.asarray(d, dtype=np.float64)


def _check_marginals(p: np.ndarray, q: np.ndarray) -> None:
    if p.shape != q.shape:
        raise InfeasibleTransport(f"length mismatch: {p.size} vs {q.size}")
    if np.any(p < 0) or np.any(q < 0):
        raise InfeasibleTransport("masses must be nonnegative")
    if abs(p.sum() - q.sum()) > MARGINAL_TOL or abs(p.sum() - 1.0) > MARGINAL_TOL:
        raise InfeasibleTransport(f"total masses differ: {p.sum()!r} vs {q.sum()!r}")


def ot_lp(p, q, cost: CostMatrix | None = None) -> TransportPlan:
    """Exact minimum-cost plan, solved as a linear program on the supports.

    Only sizes carrying positive mass enter the program, so a pair of
    cluster distributions with ``k`` and ``l`` clusters costs a ``k*l``
    variable LP regardless of ``N``.
    """
    p, q = _mass(p), _mass(q)
    _check_marginals(p, q)
    c = default_cost(p.size) if cost is None else cost
    if c.entries.shape != (p.size, p.size):
        raise ValueError("cost matrix does not match distribution length")
    rows = np.flatnonzero(p > 0)
    cols = np.flatnonzero(q > 0)
    k, l = rows.size, cols.size
    sub = c.entries[np.ix_(rows, cols)]

    a_eq = np.zeros((k + l, k * l))
    for r in range(k):
        a_eq[r, r * l:(r + 1) * l] = 1.0
    for s in range(l):
        a_eq[k + s, s::l] = 1.0
    b_eq = np.concatenate([p[rows], q[cols]])
    # Drop one redundant equality; masses are renormalized so the system stays consistent.
    b_eq[:k] /= b_eq[:k].sum()
    b_eq[k:] /= b_eq[k:].sum()
    res = linprog(sub.ravel(), A_eq=a_eq[:-1], b_eq=b_eq[:-1], bounds=(0, None), method="highs")
    if res.status != 0:
        raise InfeasibleTransport(res.message)

    plan = np.zeros((p.size, p.size))
    plan[np.ix_(rows, cols)] = np.clip(res.x, 0.0, None).reshape(k, l)
    return TransportPlan(plan, float((plan * c.entries).sum()))


def w1_1d(p, q) -> float:
    """W1 with ground cost ``|i - j|``: the L1 distance between the CDFs."""
    p, q = _mass(p), _mass(q)
    _check_marginals(p, q)
    return float(np.abs(np.cumsum(p - q)[:-1]).sum())


def w1_counts(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """W1 for integer size-mass arrays (``N`` times a cluster distribution).

    Works row-wise on ``(..., N)`` arrays. The CDF differences are integers,
    so the result is an exact integer divided by ``N``.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n = a.shape[-1]
    return np.abs(np.cumsum(a - b, axis=-1)[..., :-1]).sum(axis=-1) / n
