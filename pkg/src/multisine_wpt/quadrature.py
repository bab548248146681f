"""
Uniform-sample quadrature over one signal period.

The composite trapezoidal rule applied to a ``T``-periodic integrand has
coinciding endpoints, so it reduces to the plain mean of ``Q`` samples at
``t_q = q * T / Q``. Samples are evaluated in contiguous chunks and the chunk
sums are added in order, so the result is bitwise reproducible for a fixed
chunk size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .signal_model import TWO_PI, FrequencyGrid

ALGORITHM_RATE = 20.0
EVALUATION_RATE = 100.0
DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class QuadratureSpec:
    """Number of samples per period and the evaluation partition.

    Attributes
    ----------
    n_samples : int
        ``Q``, the number of equally spaced samples per period.
    chunk_size : int, optional
        Samples evaluated per block. ``None`` uses :data:`DEFAULT_CHUNK`.
    """

    n_samples: int
    chunk_size: Optional[int] = None

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ValueError(f"need at least 2 quadrature samples, got {self.n_samples}")
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")

    @classmethod
    def from_rate(cls, grid: FrequencyGrid, rate_factor: float,
                  chunk_size: Optional[int] = None) -> "QuadratureSpec":
        """Sample at ``rate_factor * f_c`` samples per second.

        Gives ``Q = ceil(rate_factor * f_c / delta_f)`` samples per period.
        """
        q = math.ceil(rate_factor * grid.f_c / grid.delta_f - 1e-9)
        return cls(max(int(q), 2), chunk_size)

    @classmethod
    def algorithm(cls, grid: FrequencyGrid) -> "QuadratureSpec":
        return cls.from_rate(grid, ALGORITHM_RATE)

    @classmethod
    def evaluation(cls, grid: FrequencyGrid) -> "QuadratureSpec":
        return cls.from_rate(grid, EVALUATION_RATE)

    def chunks(self):
        """Yield ``(start, stop)`` sample index ranges."""
        step = self.chunk_size or DEFAULT_CHUNK
        for start in range(0, self.n_samples, step):
            yield start, min(start + step, self.n_samples)


def sample_times(grid: FrequencyGrid, quad: QuadratureSpec) -> np.ndarray:
    """Sample instants ``q * T / Q`` for ``q = 0 .. Q-1``.

    ``q = Q`` coincides with ``q = 0`` modulo the period, so this is the same
    sample set as ``q = 1 .. Q``.
    """
    return np.arange(quad.n_samples) * (grid.period / quad.n_samples)


def tone_angles(grid: FrequencyGrid, quad: QuadratureSpec,
                start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """``w_n * t_q`` reduced to ``[0, 2*pi)`` for samples ``start:stop``.

    Shape ``(N, stop - start)``. Uses exact integer arithmetic on
    ``(k_n * q) mod Q`` where ``k_n = f_n / delta_f``, so no phase error
    accumulates at GHz carriers.
    """
    stop = quad.n_samples if stop is None else stop
    q = np.arange(start, stop, dtype=np.int64)
    k = grid.harmonics % quad.n_samples
    idx = np.mod(np.multiply.outer(k, q), quad.n_samples)
    return idx * (TWO_PI / quad.n_samples)


def periodic_mean(fn: Callable[[int, int], np.ndarray], quad: QuadratureSpec) -> np.ndarray:
    """Mean of sampled values over one period.

    ``fn(start, stop)`` returns the samples for indices ``start:stop``, with
    the sample axis last. Leading axes (if any) are preserved.
    """
    total = None
    for start, stop in quad.chunks():
        part = np.sum(fn(start, stop), axis=-1)
        total = part if total is None else total + part
    return total / quad.n_samples
