"""
Multipath channel and its per-tone frequency response.

A channel is a list of ``L`` paths with gain ``alpha_l``, delay ``tau_l`` and
phase ``xi_l``. At tone ``n``::

    h_n * exp(j * psi_n) = sum_l alpha_l * exp(j * (-w_n * tau_l + xi_l))

Random channels split the total path gain equally over the paths and draw
delays and phases uniformly. Generation uses numpy's PCG64 bit generator
(``numpy.random.default_rng(seed)``); all ``L`` delays are drawn first, then
all ``L`` phases, in tap order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .signal_model import TWO_PI, FrequencyGrid, wrap_phase


@dataclass(frozen=True)
class MultipathChannel:
    alphas: np.ndarray
    taus: np.ndarray
    xis: np.ndarray

    def __post_init__(self):
        a = np.array(self.alphas, dtype=float).reshape(-1)
        tau = np.array(self.taus, dtype=float).reshape(-1)
        xi = np.array(self.xis, dtype=float).reshape(-1)
        if a.size < 1:
            raise ValueError("a channel needs at least one path")
        if not (a.shape == tau.shape == xi.shape):
            raise ValueError("alphas, taus and xis must have equal length")
        if np.any(a < 0) or np.any(tau < 0):
            raise ValueError("path gains and delays must be nonnegative")
        xi = wrap_phase(xi)
        for arr in (a, tau, xi):
            arr.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "taus", tau)
        object.__setattr__(self, "xis", xi)

    @property
    def n_paths(self) -> int:
        return self.alphas.size

    @property
    def total_gain(self) -> float:
        """Sum of path power gains ``sum_l alpha_l**2``."""
        return float(np.dot(self.alphas, self.alphas))

    def to_dict(self) -> dict:
        return {"taps": [{"alpha": float(a), "tau_s": float(t), "xi_rad": float(x)}
                         for a, t, x in zip(self.alphas, self.taus, self.xis)]}

    @classmethod
    def from_dict(cls, d: dict) -> "MultipathChannel":
        taps = d["taps"]
        return cls([t["alpha"] for t in taps], [t["tau_s"] for t in taps],
                   [t["xi_rad"] for t in taps])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MultipathChannel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ChannelResponse:
    """Channel magnitude ``h_n >= 0`` and phase ``psi_n`` at every tone."""

    grid: FrequencyGrid
    magnitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        h = np.array(self.magnitudes, dtype=float).reshape(-1)
        psi = np.array(self.phases, dtype=float).reshape(-1)
        if h.shape != (self.grid.n_tones,) or psi.shape != (self.grid.n_tones,):
            raise ValueError(f"expected {self.grid.n_tones} tones, got {h.size} and {psi.size}")
        if np.any(h < 0):
            raise ValueError("channel magnitudes must be nonnegative")
        psi = wrap_phase(psi)
        h.setflags(write=False)
        psi.setflags(write=False)
        object.__setattr__(self, "magnitudes", h)
        object.__setattr__(self, "phases", psi)

    @classmethod
    def flat(cls, grid: FrequencyGrid, gain: float, phase: float = 0.0) -> "ChannelResponse":
        n = grid.n_tones
        return cls(grid, np.full(n, float(gain)), np.full(n, float(phase)))

    def is_flat(self, rtol: float = 1e-12) -> bool:
        h = self.magnitudes
        return bool(np.all(np.abs(h - h[0]) <= rtol * max(h[0], 1e-300)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["tone_index", "f_hz", "h", "psi_rad"])
        for n, (f, h, psi) in enumerate(zip(self.grid.frequencies, self.magnitudes, self.phases), 1):
            writer.writerow([n, f"{f:.17g}", f"{h:.17g}", f"{psi:.17g}"])
        return buf.getvalue()


def frequency_response(ch: MultipathChannel, grid: FrequencyGrid) -> ChannelResponse:
    """Evaluate the channel at every tone of ``grid``."""
    # w_n * tau_l can be thousands of radians at GHz; reduce f_n * tau_l mod 1 first
    cycles = np.multiply.outer(grid.frequencies, ch.taus)
    cycles -= np.floor(cycles)
    phase = -TWO_PI * cycles + ch.xis
    resp = np.exp(1j * phase) @ ch.alphas
    return ChannelResponse(grid, np.abs(resp), np.angle(resp))


def path_gain(total_gain_db: float) -> float:
    """Linear power gain for a path loss given in dB."""
    return 10.0 ** (-total_gain_db / 10.0)


def generate_channel(seed: int, n_paths: int, total_gain_db: float,
                     delay_max: float) -> MultipathChannel:
    """Draw an equal-power multipath channel.

    Parameters
    ----------
    seed : int
        Seed for ``numpy.random.default_rng``.
    n_paths : int
        Number of paths ``L``.
    total_gain_db : float
        Path loss in dB, applied as a power loss; every path gets gain
        ``sqrt(G / L)`` with ``G = 10 ** (-total_gain_db / 10)``.
    delay_max : float
        Delays are uniform on ``[0, delay_max]`` seconds.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    if not delay_max > 0:
        raise ValueError("delay_max must be positive")
    rng = np.random.default_rng(seed)
    taus = rng.uniform(0.0, delay_max, n_paths)
    xis = rng.uniform(0.0, TWO_PI, n_paths)
    alphas = np.full(n_paths, math.sqrt(path_gain(total_gain_db) / n_paths))
    return MultipathChannel(alphas, taus, xis)


def response_from_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a response CSV into ``(f_hz, h, psi)`` arrays."""
    rows = list(csv.DictReader(io.StringIO(text)))
    f = np.array([float(r["f_hz"]) for r in rows])
    h = np.array([float(r["h"]) for r in rows])
    psi = np.array([float(r["psi_rad"]) for r in rows])
    return f, h, psi
