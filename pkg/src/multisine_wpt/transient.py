"""
Time-domain simulation of the rectifier ODE.

Integrates::

    C * dv/dt = I0 * (exp((v_in(t) - v) / (eta*V0)) - 1) - v / R_L,   v(0) = 0

with the classical four-stage Runge-Kutta scheme at a fixed step that divides
the period exactly. ``v_in`` is tabulated once per period on the half-step
grid and reused every period. Used to check the large-capacitor steady-state
model and to measure output ripple.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numba
import numpy as np

from .channel import ChannelResponse
from .rectenna import RectennaParams
from .signal_model import MultisineWaveform, eval_received

DEFAULT_STEPS_PER_PERIOD = 20000
DEFAULT_PERIODS = 200
WINDOW_PERIODS = 10
# RK4 is stable for h * lambda down to about -2.78 on the real axis
MAX_STIFFNESS = 2.5
CONVERGENCE_RTOL = 0.01


class TransientError(RuntimeError):
    """The transient simulation was unstable or did not settle."""


@dataclass(frozen=True)
class TransientResult:
    """Output of :func:`simulate_transient`.

    ``t`` and ``v_out`` are decimated by ``record_stride``; the statistics
    are computed from every step of the final ``WINDOW_PERIODS`` periods.
    """

    t: np.ndarray
    v_out: np.ndarray
    steady_mean: float
    ripple_fraction: float
    previous_mean: float
    v_max: float
    v_min: float
    max_stiffness: float
    capacitance: float
    step: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t_s", "v_out_v"])
        for ti, vi in zip(self.t, self.v_out):
            writer.writerow([f"{ti:.17g}", f"{vi:.17g}"])
        return buf.getvalue()


@numba.njit(cache=True)
def _diode_rhs(v_in, v, i_0, inv_eta_v0, inv_rl, inv_c):
    return (i_0 * (math.exp((v_in - v) * inv_eta_v0) - 1.0) - v * inv_rl) * inv_c


@numba.njit(cache=True)
def _integrate(vin_half, m, n_periods, h, i_0, eta_v0, r_l, c, window, stride):
    inv_eta_v0 = 1.0 / eta_v0
    inv_rl = 1.0 / r_l
    inv_c = 1.0 / c
    total = m * n_periods
    last_start = total - window * m
    prev_start = total - 2 * window * m
    n_rec = total // stride + 1
    rec = np.empty(n_rec)
    rec[0] = 0.0
    v = 0.0
    sum_last = 0.0
    sum_prev = 0.0
    v_max = -1e300
    v_min = 1e300
    stiff = 0.0
    base = h * i_0 * inv_eta_v0 * inv_c
    two_m = 2 * m
    for i in range(total):
        j = (2 * i) % two_m
        a = vin_half[j]
        b = vin_half[j + 1]
        e = vin_half[(j + 2) % two_m]
        # local Jacobian magnitude times step at the start of the step
        s = base * math.exp((a - v) * inv_eta_v0) + h * inv_rl * inv_c
        if s > stiff:
            stiff = s
        k1 = _diode_rhs(a, v, i_0, inv_eta_v0, inv_rl, inv_c)
        k2 = _diode_rhs(b, v + 0.5 * h * k1, i_0, inv_eta_v0, inv_rl, inv_c)
        k3 = _diode_rhs(b, v + 0.5 * h * k2, i_0, inv_eta_v0, inv_rl, inv_c)
        k4 = _diode_rhs(e, v + h * k3, i_0, inv_eta_v0, inv_rl, inv_c)
        v = v + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if stiff > MAX_STIFFNESS or not math.isfinite(v):
            return rec[: i // stride + 1], v, sum_last, sum_prev, v_max, v_min, stiff, i + 1
        if i >= last_start:
            sum_last += v
            if v > v_max:
                v_max = v
            if v < v_min:
                v_min = v
        elif i >= prev_start:
            sum_prev += v
        if (i + 1) % stride == 0:
            rec[(i + 1) // stride] = v
    return rec, v, sum_last, sum_prev, v_max, v_min, stiff, total


def simulate_transient(w: MultisineWaveform, ch: ChannelResponse, p: RectennaParams,
                       step: float | None = None, n_periods: int = DEFAULT_PERIODS,
                       capacitance: float | None = None,
                       record_stride: int = 100) -> TransientResult:
    """Simulate the rectifier from rest and report the settled output.

    Parameters
    ----------
    step : float, optional
        Time step in seconds, at most ``T / 1000``; rounded down so that it
        divides the period. Default ``T / 20000``.
    n_periods : int
        Periods simulated; must exceed twice the statistics window.
    capacitance : float, optional
        Overrides ``p.capacitance(T)``.

    Raises
    ------
    TransientError
        If the step is unstable for the diode's conductance or the mean over
        the final window differs from the window before by more than 1 %.
    """
    T = w.grid.period
    if step is None:
        m = DEFAULT_STEPS_PER_PERIOD
    else:
        if step > T / 1000 * (1 + 1e-12):
            raise ValueError(f"step {step:.3g} s exceeds T/1000 = {T / 1000:.3g} s")
        m = math.ceil(T / step - 1e-9)
    if n_periods <= 2 * WINDOW_PERIODS:
        raise ValueError(f"n_periods must exceed {2 * WINDOW_PERIODS}")
    h = T / m
    c = capacitance if capacitance is not None else p.capacitance(T)

    t_half = np.arange(2 * m) * (0.5 * h)
    vin_half = math.sqrt(p.r_s) * np.asarray(eval_received(w, ch, t_half), dtype=float)

    rec, v_end, sum_last, sum_prev, v_max, v_min, stiff, done = _integrate(
        vin_half, m, n_periods, h, p.i_0, p.eta_v0, p.r_l, c, WINDOW_PERIODS, record_stride)
    total = m * n_periods
    if done < total:
        raise TransientError(
            f"step {h:.3g} s is too large: step times diode conductance over C "
            f"reached {stiff:.3g} (limit {MAX_STIFFNESS}) at t = {done * h:.3g} s")

    n_win = WINDOW_PERIODS * m
    mean_last = sum_last / n_win
    mean_prev = sum_prev / n_win
    scale = max(abs(mean_last), abs(mean_prev))
    if scale > 0 and abs(mean_last - mean_prev) > CONVERGENCE_RTOL * scale:
        raise TransientError(
            f"output did not settle: window means {mean_prev:.6g} V and {mean_last:.6g} V "
            f"after {n_periods} periods")
    ripple = (v_max - v_min) / v_max if v_max > 0 else 0.0
    t = np.arange(rec.size) * (record_stride * h)
    return TransientResult(t, rec, mean_last, ripple, mean_prev, v_max, v_min,
                           stiff, c, h)
