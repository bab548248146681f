"""
Frequency grid and multisine waveform.

A multisine transmit signal is a sum of ``N`` sinewaves placed on a uniform
tone grid ``f_n = f0 + (n - 1) * delta_f`` inside the band ``[f_min, f_max]``::

    x(t) = sum_n sqrt(2) * s_n * cos(w_n * t + phi_n),   w_n = 2 * pi * f_n

Because ``f0`` is an integer multiple of ``delta_f`` the signal is periodic
with period ``T = 1 / delta_f``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# relative slack when deciding that f_min / delta_f is already an integer
_INTEGER_RTOL = 1e-9


def wrap_phase(phi):
    """Wrap phases into ``[0, 2*pi)``."""
    out = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform tone grid derived from a frequency band.

    Use :func:`build_grid` rather than constructing this directly.

    Attributes
    ----------
    f_min, f_max : float
        Band edges in Hz.
    n_tones : int
        Number of tones ``N``.
    delta_f : float
        Tone spacing in Hz, ``(f_max - f_min) / N``.
    first_index : int
        ``f0 / delta_f``; the integer harmonic number of the first tone.
    """

    f_min: float
    f_max: float
    n_tones: int
    delta_f: float
    first_index: int

    @property
    def f0(self) -> float:
        return self.first_index * self.delta_f

    @property
    def f_c(self) -> float:
        return 0.5 * (self.f_min + self.f_max)

    @property
    def bandwidth(self) -> float:
        return self.f_max - self.f_min

    @property
    def period(self) -> float:
        return 1.0 / self.delta_f

    @property
    def harmonics(self) -> np.ndarray:
        """Integer harmonic number ``f_n / delta_f`` of every tone."""
        return self.first_index + np.arange(self.n_tones, dtype=np.int64)

    @property
    def frequencies(self) -> np.ndarray:
        return self.harmonics * self.delta_f

    @property
    def angular_frequencies(self) -> np.ndarray:
        return TWO_PI * self.frequencies

    def same_as(self, other: "FrequencyGrid") -> bool:
        return (self.n_tones == other.n_tones
                and self.first_index == other.first_index
                and math.isclose(self.delta_f, other.delta_f, rel_tol=1e-12))

    def to_dict(self) -> dict:
        return {"f_min": self.f_min, "f_max": self.f_max, "n_tones": self.n_tones}


def build_grid(f_min: float, f_max: float, n_tones: int) -> FrequencyGrid:
    """Place ``n_tones`` tones in ``[f_min, f_max]``.

    ``delta_f = (f_max - f_min) / n_tones`` and ``f0 = ceil(f_min / delta_f) *
    delta_f``.

    >>> g = build_grid(19e3, 21e3, 4)
    >>> g.delta_f, g.f0
    (500.0, 19000.0)
    """
    if not (f_min > 0):
        raise ValueError(f"f_min must be positive, got {f_min}")
    if not (f_max > f_min):
        raise ValueError(f"bandwidth must be positive, got f_min={f_min}, f_max={f_max}")
    if int(n_tones) != n_tones or n_tones < 1:
        raise ValueError(f"n_tones must be a positive integer, got {n_tones}")
    n_tones = int(n_tones)
    delta_f = (f_max - f_min) / n_tones
    ratio = f_min / delta_f
    nearest = round(ratio)
    if abs(ratio - nearest) <= _INTEGER_RTOL * max(1.0, ratio):
        first_index = int(nearest)
    else:
        first_index = math.ceil(ratio)
    grid = FrequencyGrid(float(f_min), float(f_max), n_tones, delta_f, first_index)
    top = grid.f0 + (n_tones - 1) * delta_f
    # cannot happen with the ceil rule; kept as an internal consistency check
    assert top <= f_max * (1 + 1e-12), f"last tone {top} Hz exceeds f_max {f_max} Hz"
    return grid


@dataclass(frozen=True)
class MultisineWaveform:
    """Per-tone amplitudes (sqrt(W)) and phases (rad) on a tone grid.

    Phases are wrapped to ``[0, 2*pi)`` on construction.
    """

    grid: FrequencyGrid
    amplitudes: np.ndarray
    phases: np.ndarray = field(default=None)

    def __post_init__(self):
        s = np.array(self.amplitudes, dtype=float).reshape(-1)
        if self.phases is None:
            phi = np.zeros_like(s)
        else:
            phi = np.array(self.phases, dtype=float).reshape(-1)
        if s.shape != (self.grid.n_tones,) or phi.shape != (self.grid.n_tones,):
            raise ValueError(
                f"expected {self.grid.n_tones} amplitudes and phases, "
                f"got {s.size} and {phi.size}")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValueError("amplitudes must be finite and nonnegative")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phases must be finite")
        phi = wrap_phase(phi)
        s.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "amplitudes", s)
        object.__setattr__(self, "phases", phi)

    @property
    def power(self) -> float:
        return transmit_power(self)

    def scaled(self, k: float) -> "MultisineWaveform":
        return MultisineWaveform(self.grid, k * self.amplitudes, self.phases)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "amplitudes": self.amplitudes.tolist(),
            "phases": self.phases.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MultisineWaveform":
        g = d["grid"]
        grid = build_grid(g["f_min"], g["f_max"], g["n_tones"])
        return cls(grid, d["amplitudes"], d["phases"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MultisineWaveform":
        return cls.from_dict(json.loads(text))


def transmit_power(w: MultisineWaveform) -> float:
    """Average transmit power ``sum_n s_n**2`` in W."""
    return float(np.dot(w.amplitudes, w.amplitudes))


def _sum_of_cosines(grid, coeffs, phases, t):
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    # reduce time modulo the period so w_n * t stays small for long times
    tr = np.mod(t, grid.period)
    arg = np.multiply.outer(tr, grid.angular_frequencies) + phases
    out = np.cos(arg) @ coeffs
    return float(out[0]) if scalar else out.reshape(t.shape)


def eval_transmit(w: MultisineWaveform, t):
    """Transmit signal ``x(t)`` at time(s) ``t`` (s)."""
    return _sum_of_cosines(w.grid, math.sqrt(2.0) * w.amplitudes, w.phases, t)


def eval_received(w: MultisineWaveform, ch, t):
    """Received signal ``y(t)`` after a channel with per-tone response ``ch``.

    ``y(t) = sum_n sqrt(2) * s_n * h_n * cos(w_n * t + psi_n + phi_n)``

    Parameters
    ----------
    w : MultisineWaveform
    ch : ChannelResponse
        Must be defined on the same grid as ``w``.
    t : float or array_like
    """
    if not w.grid.same_as(ch.grid):
        raise ValueError("waveform and channel response are on different frequency grids")
    coeffs = math.sqrt(2.0) * w.amplitudes * ch.magnitudes
    return _sum_of_cosines(w.grid, coeffs, ch.phases + w.phases, t)
