"""
Steady-state rectenna model.

Single ideal diode ``i_d = I0 * (exp(v_d / (eta * V0)) - 1)`` feeding a
low-pass capacitor and load ``R_L``, driven through a matched antenna so that
``v_in(t) = sqrt(R_s) * y(t)``. With a large capacitor the DC output voltage
``v`` solves::

    exp(v / (eta*V0)) * (1 + v / (R_L * I0)) = <exp(sqrt(R_s) * y(t) / (eta*V0))>

where ``<.>`` is the time average over one period. The left side is strictly
increasing in ``v``, so the root is unique and is found by bisection.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .channel import ChannelResponse
from .quadrature import QuadratureSpec, periodic_mean, tone_angles
from .signal_model import MultisineWaveform

DEFAULT_EXPONENT_CAP = 700.0
DEFAULT_DC_TOL = 1e-10


class ExponentOverflowError(ArithmeticError):
    """The diode exponent is too large to evaluate in double precision."""


@dataclass(frozen=True)
class RectennaParams:
    """Rectenna circuit constants (SI units).

    Defaults are a 50 ohm antenna, a Schottky-like diode and a 1.6 kohm load.
    The capacitance only matters for transient simulation; ``None`` means
    ``50 * T / R_L`` for the waveform period ``T``.
    """

    r_s: float = 50.0
    r_l: float = 1600.0
    i_0: float = 5e-6
    v_0: float = 0.02586
    eta: float = 1.05
    c: float | None = None

    def __post_init__(self):
        for name in ("r_s", "r_l", "i_0", "v_0", "eta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.c is not None and not self.c > 0:
            raise ValueError("c must be strictly positive")

    @property
    def eta_v0(self) -> float:
        return self.eta * self.v_0

    @property
    def gain(self) -> float:
        """``sqrt(R_s) / (eta * V0)``, the exponent per unit received signal."""
        return math.sqrt(self.r_s) / self.eta_v0

    def capacitance(self, period: float, multiplier: float = 50.0) -> float:
        return self.c if self.c is not None else multiplier * period / self.r_l

    def lhs(self, v):
        """Left side of the DC equation at output voltage ``v``."""
        return np.exp(v / self.eta_v0) * (1.0 + v / (self.r_l * self.i_0))

    def to_dict(self) -> dict:
        return {"r_s_ohm": self.r_s, "r_l_ohm": self.r_l, "i_0_a": self.i_0,
                "v_0_v": self.v_0, "eta": self.eta, "c_f": self.c}

    @classmethod
    def from_dict(cls, d: dict) -> "RectennaParams":
        keys = {"r_s_ohm": "r_s", "r_l_ohm": "r_l", "i_0_a": "i_0",
                "v_0_v": "v_0", "eta": "eta", "c_f": "c"}
        return cls(**{keys[k]: v for k, v in d.items() if k in keys})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RectennaParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DcOperatingPoint:
    v_out: float
    p_out: float
    rhs_value: float
    bisection_residual: float
    iterations: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def _check_exponent(peak: float, cap: float) -> None:
    if peak > cap:
        raise ExponentOverflowError(
            f"peak diode exponent {peak:.6g} exceeds cap {cap:.6g}; "
            "the received signal is unphysically large for this rectenna")


def received_samples(w: MultisineWaveform, ch: ChannelResponse, quad: QuadratureSpec,
                     start: int, stop: int) -> np.ndarray:
    """Received signal ``y`` at quadrature samples ``start:stop``."""
    if not w.grid.same_as(ch.grid):
        raise ValueError("waveform and channel response are on different frequency grids")
    coeffs = math.sqrt(2.0) * w.amplitudes * ch.magnitudes
    ang = tone_angles(w.grid, quad, start, stop) + (ch.phases + w.phases)[:, None]
    return coeffs @ np.cos(ang)


def rectifier_rhs(w: MultisineWaveform, ch: ChannelResponse, p: RectennaParams,
                  quad: QuadratureSpec, exponent_cap: float = DEFAULT_EXPONENT_CAP) -> float:
    """Time average of ``exp(sqrt(R_s) * y(t) / (eta * V0))`` over one period."""
    # every sample is bounded by the coherent peak, so test that before exp()
    peak = p.gain * math.sqrt(2.0) * float(np.dot(w.amplitudes, ch.magnitudes))
    _check_exponent(peak, exponent_cap)

    def integrand(start, stop):
        return np.exp(p.gain * received_samples(w, ch, quad, start, stop))

    return float(periodic_mean(integrand, quad))


def bisection_iteration_bound(rhs: float, p: RectennaParams, tol: float) -> int:
    """Iterations needed to shrink ``[0, eta*V0*ln(rhs)]`` below ``tol * eta*V0``."""
    v_max = p.eta_v0 * math.log(rhs)
    if v_max <= tol * p.eta_v0:
        return 0
    return math.ceil(math.log2(v_max / (tol * p.eta_v0)))


def solve_dc(rhs: float, p: RectennaParams, tol: float = DEFAULT_DC_TOL) -> DcOperatingPoint:
    """Find the DC output voltage for a given right-hand side by bisection.

    The root is bracketed by ``[0, eta*V0*ln(rhs)]``. After the bracket is
    narrower than ``tol * eta * V0`` a final linear interpolation between
    the bracket ends is taken, which brings the relative residual
    ``|LHS(v) - rhs| / rhs`` below ``tol``.

    Raises
    ------
    ValueError
        If ``rhs < 1``; that would mean a negative DC voltage, which a
        zero-mean input cannot produce.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not rhs >= 1.0:
        raise ValueError(f"rhs={rhs!r} < 1 implies a negative DC voltage; "
                         "check that the input signal has zero mean")
    if rhs == 1.0:
        return DcOperatingPoint(0.0, 0.0, 1.0, 0.0, 0)

    lo, hi = 0.0, p.eta_v0 * math.log(rhs)
    f_lo, f_hi = p.lhs(lo) - rhs, p.lhs(hi) - rhs
    n_max = bisection_iteration_bound(rhs, p, tol)
    it = 0
    while it < n_max:
        mid = 0.5 * (lo + hi)
        f_mid = p.lhs(mid) - rhs
        it += 1
        if abs(f_mid) <= tol * rhs:
            lo = hi = mid
            f_lo = f_hi = f_mid
            break
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    if hi > lo and f_hi > f_lo:
        v = lo - f_lo * (hi - lo) / (f_hi - f_lo)
    else:
        v = lo if abs(f_lo) <= abs(f_hi) else hi
    residual = abs(p.lhs(v) - rhs) / rhs
    return DcOperatingPoint(v, v * v / p.r_l, rhs, residual, it)


def harvested_power(w: MultisineWaveform, ch: ChannelResponse, p: RectennaParams,
                    quad: QuadratureSpec | None = None,
                    tol: float = DEFAULT_DC_TOL) -> DcOperatingPoint:
    """DC operating point of the rectenna for transmit waveform ``w``.

    ``quad`` defaults to the evaluation-grade sampling (rate ``100 * f_c``).
    """
    if quad is None:
        quad = QuadratureSpec.evaluation(w.grid)
    return solve_dc(rectifier_rhs(w, ch, p, quad), p, tol)


def taylor_rhs(w: MultisineWaveform, ch: ChannelResponse, p: RectennaParams,
               order: int, quad: QuadratureSpec) -> float:
    """Time average of the diode exponential truncated to a Taylor polynomial.

    ``<sum_{k=0}^{order} (c^k / k!) * y(t)**k>`` with ``c = sqrt(R_s)/(eta*V0)``.
    Small-signal models use ``order`` 2, 4 or 6; larger orders are accepted
    for convergence checks.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")

    def integrand(start, stop):
        u = p.gain * received_samples(w, ch, quad, start, stop)
        term = np.ones_like(u)
        acc = np.ones_like(u)
        for k in range(1, order + 1):
            term = term * u / k
            acc = acc + term
        return acc

    return float(periodic_mean(integrand, quad))
