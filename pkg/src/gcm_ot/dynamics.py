"""Globally coupled logistic map with seeded per-step noise.

    x_{n+1}(i) = (1 - eps) f(x_n(i)) + eps/N sum_j f(x_n(j)) + xi_n(i)
    f(x) = alpha x (1 - x)

The noise xi_n is drawn from a stream keyed by ``(noise_seed, n)`` only, so
every initial condition run with the same ``noise_seed`` sees the same noise.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class GcmParams:
    alpha: float
    epsilon: float
    n_elements: int
    delta: float = 1e-6
    noise_amplitude: float = 1e-12
    noise_seed: int = 0
    init_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 4.0:
            raise ValueError(f"alpha must lie in [0, 4], got {self.alpha}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ValueError(f"n_elements must be a positive integer, got {self.n_elements}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be nonnegative")
        if self.noise_amplitude >= self.delta:
            raise ValueError("noise_amplitude must be smaller than delta")
        for name in ("noise_seed", "init_seed"):
            s = getattr(self, name)
            if int(s) != s or not 0 <= s < 2**64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {s}")

    def with_(self, **changes) -> "GcmParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class SystemState:
    values: np.ndarray
    time_index: int = 0

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("state values must be a 1-D vector")
        if np.any(v < 0.0) or np.any(v > 1.0) or not np.all(np.isfinite(v)):
            raise ValueError("state values must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def n_elements(self) -> int:
        return self.values.shape[0]


@dataclass
class Trajectory:
    """States ``x_0 .. x_T`` stored row-wise in a ``(T+1, N)`` array."""

    params: GcmParams
    values: np.ndarray = field(repr=False)

    @property
    def total_steps(self) -> int:
        return self.values.shape[0] - 1

    def __len__(self) -> int:
        return self.values.shape[0]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.values)

    @property
    def states(self) -> list[SystemState]:
        return [SystemState(v, n) for n, v in enumerate(self.values)]

    def state(self, n: int) -> SystemState:
        return SystemState(self.values[n], n)


def logistic(x, alpha: float):
    """``alpha * x * (1 - x)``; accepts scalars or arrays."""
    xa = np.asarray(x, dtype=np.float64)
    if not 0.0 <= alpha <= 4.0:
        raise ValueError(f"alpha must lie in [0, 4], got {alpha}")
    if np.any(xa < 0.0) or np.any(xa > 1.0):
        raise ValueError("x must lie in [0, 1]")
    out = alpha * xa * (1.0 - xa)
    return float(out) if out.ndim == 0 else out


def _advance(x: np.ndarray, alpha: float, epsilon: float, noise) -> np.ndarray:
    # Works on (N,) or (M, N); rows are independent systems.
    f = alpha * x * (1.0 - x)
    mean_field = f.sum(axis=-1, keepdims=True) / x.shape[-1]
    out = (1.0 - epsilon) * f + epsilon * mean_field
    out += noise
    np.clip(out, 0.0, 1.0, out=out)
    return out


def step(state: SystemState, params: GcmParams, noise: Sequence[float] | np.ndarray | None = None) -> SystemState:
    """One application of the coupled map, followed by noise and clamping."""
    x = state.values
    if noise is None:
        noise = np.zeros_like(x)
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != x.shape:
        raise ValueError(f"noise has shape {noise.shape}, state has shape {x.shape}")
    return SystemState(_advance(x, params.alpha, params.epsilon, noise), state.time_index + 1)


def noise_vector(noise_seed: int, step_index: int, n_elements: int, amplitude: float) -> np.ndarray:
    """Uniform noise on ``[-amplitude, amplitude]`` for one step.

    Element ``i`` of the result depends only on ``(noise_seed, step_index, i)``:
    a longer vector extends a shorter one with the same key.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    if amplitude == 0:
        return np.zeros(n_elements)
    rng = np.random.default_rng([int(noise_seed), int(step_index)])
    return rng.uniform(-amplitude, amplitude, n_elements)


def make_initial(init_seed: int, n_elements: int) -> SystemState:
    if n_elements < 1:
        raise ValueError("n_elements must be at least 1")
    rng = np.random.default_rng(int(init_seed))
    return SystemState(rng.uniform(0.0, 1.0, n_elements), 0)


def iterate(
    params: GcmParams,
    total_steps: int,
    initial: SystemState | np.ndarray | None = None,
) -> Iterator[np.ndarray]:
    """Yield ``x_0, x_1, ..., x_T`` without keeping the history.

    ``initial`` may be a single state or an ``(M, N)`` batch of initial
    conditions; a batch is advanced in lockstep with one shared noise draw
    per step, which is bitwise identical to running each row alone.
    """
    if total_steps < 1:
        raise ValueError("total_steps must be at least 1")
    if initial is None:
        x = make_initial(params.init_seed, params.n_elements).values
    elif isinstance(initial, SystemState):
        x = initial.values
    else:
        x = np.asarray(initial, dtype=np.float64)
    if x.shape[-1] != params.n_elements:
        raise ValueError("initial state does not match n_elements")
    x = x.copy()
    yield x
    for n in range(total_steps):
        xi = noise_vector(params.noise_seed, n, params.n_elements, params.noise_amplitude)
        x = _advance(x, params.alpha, params.epsilon, xi)
        yield x


def simulate(
    params: GcmParams,
    total_steps: int,
    initial: SystemState | np.ndarray | None = None,
) -> Trajectory:
    """Materialize a full trajectory of ``total_steps + 1`` states."""
    out = np.empty((total_steps + 1, params.n_elements)) if total_steps >= 1 else None
    for n, x in enumerate(iterate(params, total_steps, initial)):
        if x.ndim != 1:
            raise ValueError("simulate takes a single initial state; use iterate for batches")
        out[n] = x
    return Trajectory(params, out)
