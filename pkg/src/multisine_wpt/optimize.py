"""
Waveform design under a transmit sum-power constraint.

All designs align the tone phases with the channel (``phi_n = -psi_n``) so
every tone peaks at ``t = 0`` at the receiver, and differ in how the power
``P_T`` is split over tones:

* :func:`single_tone`: everything on the strongest tone (optimal for the
  second-order small-signal diode model).
* :func:`equal_power`: ``s_n = sqrt(P_T / N)``.
* :func:`frequency_mrt`: ``s_n`` proportional to ``h_n``; maximises the
  peak of the diode exponential at ``t = 0``.
* :func:`scp_qclp`: sequential linearisation of the sampled time-averaged
  exponential; each step is a linear objective over the power ball, solved
  in closed form by :func:`qclp_step`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelResponse
from .quadrature import QuadratureSpec, tone_angles
from .rectenna import DEFAULT_EXPONENT_CAP, RectennaParams, _check_exponent
from .signal_model import MultisineWaveform, wrap_phase

DEFAULT_EPSILON = 1e-3
DEFAULT_MAX_ITERS = 500


def align_phases(ch: ChannelResponse) -> np.ndarray:
    """Phases ``(-psi_n) mod 2*pi`` that add all tones coherently at ``t = 0``."""
    return wrap_phase(-ch.phases)


def _aligned(ch: ChannelResponse, s) -> MultisineWaveform:
    return MultisineWaveform(ch.grid, s, align_phases(ch))


def single_tone(ch: ChannelResponse, p_t: float) -> MultisineWaveform:
    """All power on the tone with the largest channel gain (lowest index on ties)."""
    if p_t < 0:
        raise ValueError("p_t must be nonnegative")
    s = np.zeros(ch.grid.n_tones)
    s[int(np.argmax(ch.magnitudes))] = math.sqrt(p_t)
    return _aligned(ch, s)


def equal_power(ch: ChannelResponse, p_t: float) -> MultisineWaveform:
    if p_t < 0:
        raise ValueError("p_t must be nonnegative")
    n = ch.grid.n_tones
    return _aligned(ch, np.full(n, math.sqrt(p_t / n)))


def frequency_mrt(ch: ChannelResponse, p_t: float) -> MultisineWaveform:
    """Amplitudes proportional to the channel gains, ``s = h * sqrt(P_T / |h|^2)``."""
    if p_t < 0:
        raise ValueError("p_t must be nonnegative")
    h = ch.magnitudes
    norm2 = float(np.dot(h, h))
    if not norm2 > 0:
        raise ValueError("all channel gains are zero; the received power does not "
                         "depend on the amplitudes")
    return _aligned(ch, h * math.sqrt(p_t / norm2))


class AlignedObjective:
    """Sampled time-averaged diode exponential under aligned phases.

    ``z(t) = exp(c * sum_n s_n h_n cos(w_n t))`` with ``c = sqrt(2 R_s)/(eta V0)``.
    The tone cosines at the quadrature samples are tabulated once, so repeated
    evaluations (one per SCP iteration) cost one matrix-vector product each
    way.
    """

    def __init__(self, ch: ChannelResponse, p: RectennaParams, quad: QuadratureSpec,
                 exponent_cap: float = DEFAULT_EXPONENT_CAP):
        self.ch = ch
        self.p = p
        self.quad = quad
        self.exponent_cap = exponent_cap
        self.c = math.sqrt(2.0 * p.r_s) / p.eta_v0
        self._cos = [np.cos(tone_angles(ch.grid, quad, a, b)) for a, b in quad.chunks()]

    def coefficients(self, s) -> tuple[float, np.ndarray]:
        """Return ``(beta0, betas)``: the sampled mean of ``z`` and its gradient in ``s``."""
        s = np.asarray(s, dtype=float)
        weights = self.c * s * self.ch.magnitudes
        _check_exponent(float(np.sum(weights)), self.exponent_cap)
        total0 = 0.0
        total_n = np.zeros_like(s)
        for cos in self._cos:
            z = np.exp(weights @ cos)
            total0 += z.sum()
            total_n += cos @ z
        q = self.quad.n_samples
        return total0 / q, self.c * self.ch.magnitudes * total_n / q

    def value(self, s) -> float:
        return self.coefficients(s)[0]


def scp_coefficients(s, ch: ChannelResponse, p: RectennaParams,
                     quad: QuadratureSpec) -> tuple[float, np.ndarray]:
    """Linearisation coefficients of the sampled objective at amplitudes ``s``.

    ``beta0 = mean_q z(t_q)`` and
    ``beta_n = mean_q c * h_n * cos(w_n t_q) * z(t_q)``, which is exactly the
    gradient of ``beta0`` with respect to ``s_n``.
    """
    return AlignedObjective(ch, p, quad).coefficients(s)


def qclp_step(betas, p_t: float) -> np.ndarray:
    """Maximise ``sum_n beta_n s_n`` over ``{s >= 0, sum s_n^2 <= P_T}``.

    Negative coefficients are clamped to zero first (those amplitudes sit on
    their lower bound); the rest is normalised onto the power sphere.
    """
    if p_t < 0:
        raise ValueError("p_t must be nonnegative")
    b = np.clip(np.asarray(betas, dtype=float), 0.0, None)
    norm2 = float(np.dot(b, b))
    if not norm2 > 0:
        raise ValueError("all linearisation coefficients are <= 0; "
                         "the linearised objective has no ascent direction")
    return b * math.sqrt(p_t / norm2)


@dataclass(frozen=True)
class ScpConfig:
    epsilon: float = DEFAULT_EPSILON
    max_iters: int = DEFAULT_MAX_ITERS
    rate_factor: float = 20.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    def quadrature(self, grid) -> QuadratureSpec:
        return QuadratureSpec.from_rate(grid, self.rate_factor)


@dataclass(frozen=True)
class ScpIteration:
    m: int
    amplitudes: np.ndarray
    beta0: float
    betas: np.ndarray
    delta: float | None


@dataclass
class ScpTrace:
    iterations: list[ScpIteration] = field(default_factory=list)
    converged: bool = False
    final_waveform: MultisineWaveform | None = None

    @property
    def n_steps(self) -> int:
        """Number of QCLP updates performed."""
        return max(len(self.iterations) - 1, 0)

    @property
    def final(self) -> ScpIteration:
        return self.iterations[-1]

    def kkt_spread(self, active_share: float = 1e-3) -> float:
        """Relative spread of ``beta_n / s_n`` over the active tones.

        Zero at an exact stationary point of the sampled problem on the power
        sphere. A tone is active when ``s_n >= active_share * |s|``, i.e. it
        carries at least ``active_share**2`` of the power. Tones heading to
        the bound decay only geometrically under the iteration, so a plain
        ``s_n > 0`` test would count them long after they stop mattering.
        """
        it = self.final
        s = it.amplitudes
        if not np.any(s > 0):
            return 0.0
        active = s >= active_share * np.linalg.norm(s)
        ratio = it.betas[active] / s[active]
        return float((ratio.max() - ratio.min()) / ratio.mean())

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": [
                {"m": it.m, "beta0": it.beta0, "delta": it.delta,
                 "amplitudes": it.amplitudes.tolist(), "betas": it.betas.tolist()}
                for it in self.iterations],
            "final_waveform": None if self.final_waveform is None else self.final_waveform.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        n = self.iterations[0].amplitudes.size if self.iterations else 0
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "beta0", "delta"] + [f"s_{k}" for k in range(1, n + 1)])
        for it in self.iterations:
            delta = "" if it.delta is None else f"{it.delta:.17g}"
            writer.writerow([it.m, f"{it.beta0:.17g}", delta]
                            + [f"{x:.17g}" for x in it.amplitudes])
        return buf.getvalue()


def scp_qclp(ch: ChannelResponse, p: RectennaParams, p_t: float,
             cfg: ScpConfig | None = None, initial=None) -> ScpTrace:
    """Sequential convex programming with closed-form QCLP steps.

    Starts from equal power ``s_n = sqrt(P_T / N)`` (or ``initial``), then
    repeats: compute ``(beta0, betas)`` at the current point, jump to the
    QCLP optimum, recompute ``beta0`` there, and stop once the relative
    change of ``beta0`` is at most ``cfg.epsilon``. Running out of
    ``cfg.max_iters`` steps is reported through ``trace.converged``.
    """
    cfg = cfg or ScpConfig()
    if p_t < 0:
        raise ValueError("p_t must be nonnegative")
    n = ch.grid.n_tones
    trace = ScpTrace()
    s = np.full(n, math.sqrt(p_t / n)) if initial is None else np.asarray(initial, dtype=float)
    if p_t == 0 or not np.any(ch.magnitudes > 0):
        # objective is constant; nothing to optimise
        trace.iterations.append(ScpIteration(1, s, 1.0, np.zeros(n), None))
        trace.converged = True
        trace.final_waveform = _aligned(ch, s)
        return trace

    obj = AlignedObjective(ch, p, cfg.quadrature(ch.grid))
    beta0, betas = obj.coefficients(s)
    trace.iterations.append(ScpIteration(1, s, beta0, betas, None))
    for m in range(2, cfg.max_iters + 2):
        s = qclp_step(betas, p_t)
        new0, betas = obj.coefficients(s)
        delta = abs(new0 - beta0) / beta0
        beta0 = new0
        trace.iterations.append(ScpIteration(m, s, beta0, betas, delta))
        if delta <= cfg.epsilon:
            trace.converged = True
            break
    trace.final_waveform = _aligned(ch, s)
    return trace


METHODS = ("single_tone", "equal", "mrt", "scp_qclp")


def design(method: str, ch: ChannelResponse, p: RectennaParams, p_t: float,
           cfg: ScpConfig | None = None) -> tuple[MultisineWaveform, ScpTrace | None]:
    """Dispatch to a named design; SCP also returns its trace."""
    if method == "single_tone":
        return single_tone(ch, p_t), None
    if method == "equal":
        return equal_power(ch, p_t), None
    if method == "mrt":
        return frequency_mrt(ch, p_t), None
    if method == "scp_qclp":
        trace = scp_qclp(ch, p, p_t, cfg)
        return trace.final_waveform, trace
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
