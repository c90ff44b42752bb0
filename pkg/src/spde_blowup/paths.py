"""Reproducible discretized Brownian paths on a uniform grid.

Each path is generated by its own counter-based Philox stream keyed by
(seed, path_id), so path i is a pure function of the key and the grid:
evaluation order, worker count, and batching can never change a path.
Increments over the grid steps are independent N(0, dt) draws; components
of a two-dimensional path come from the same stream and are independent.

Paths are generated on demand and never persisted; at 1e6 paths only the
derived statistics are worth keeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SimGrid", "BrownianPath", "sample_path"]

_U64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SimGrid:
    """Uniform time grid: nodes t_k = k*dt for k = 0..n_steps.

    n_steps is the smallest integer with n_steps*dt >= horizon (with a snap
    for horizons that are float-noisy multiples of dt).
    """

    dt: float
    horizon: float

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError("dt must be positive")
        if not (math.isfinite(self.horizon) and self.horizon >= self.dt):
            raise ValueError("horizon must be at least dt")

    @property
    def n_steps(self) -> int:
        ratio = self.horizon / self.dt
        nearest = round(ratio)
        if abs(ratio - nearest) <= 1e-9 * max(1.0, abs(ratio)):
            return max(1, int(nearest))
        return max(1, int(math.ceil(ratio)))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class BrownianPath:
    """Discretized standard Brownian path(s): values[j, k] = W_j(t_k).

    values has shape (dims, n_steps + 1) with W_j(0) = 0.
    """

    grid: SimGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != self.grid.n_steps + 1:
            raise ValueError("values must have shape (dims, n_steps + 1)")
        if np.any(v[:, 0] != 0.0):
            raise ValueError("paths must start at W(0) = 0")
        object.__setattr__(self, "values", v)

    @property
    def dims(self) -> int:
        return self.values.shape[0]


def _generator(seed: int, path_id: int) -> np.random.Generator:
    key = np.array([seed & _U64, path_id & _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_path(
    grid: SimGrid,
    dims: int = 1,
    seed: int = 0,
    path_id: int = 0,
    zero_noise: bool = False,
) -> BrownianPath:
    """Sample one Brownian path, a deterministic function of (seed, path_id).

    Distinct path_ids give statistically independent paths under the same
    seed.  zero_noise forces W identically 0 (debug mode backing the exact
    analytic test oracles).
    """
    if dims not in (1, 2):
        raise ValueError("dims must be 1 or 2")
    n = grid.n_steps
    values = np.zeros((dims, n + 1))
    if not zero_noise:
        gen = _generator(seed, path_id)
        increments = gen.standard_normal((dims, n)) * math.sqrt(grid.dt)
        np.cumsum(increments, axis=1, out=values[:, 1:])
    return BrownianPath(grid=grid, values=values)
