"""
Rectifier transient and output ripple
-------------------------------------

Integrate the rectifier from rest on the 20 kHz toy profile, where a few
hundred periods are cheap, and compare the settled output with the
steady-state solution. The ripple shrinks as the capacitor grows.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from multisine_wpt import build_grid, frequency_response, generate_channel, harvested_power
from multisine_wpt.optimize import frequency_mrt
from multisine_wpt.rectenna import RectennaParams
from multisine_wpt.transient import simulate_transient

grid = build_grid(19e3, 21e3, 16)
resp = frequency_response(generate_channel(0, 18, 51.67, 1.5e-3), grid)
params = RectennaParams()
w = frequency_mrt(resp, 10.0)
v_bar = harvested_power(w, resp, params).v_out

for k in (25, 50, 100):
    r = simulate_transient(w, resp, params, capacitance=k * grid.period / params.r_l)
    plt.plot(1e3 * r.t, r.v_out, lw=0.8, label=f"C R_L / T = {k}")
    print(f"C R_L/T = {k:3d}: ripple {100 * r.ripple_fraction:.2f}%, "
          f"steady {r.steady_mean:.4f} V vs {v_bar:.4f} V")
plt.axhline(v_bar, color="k", ls="--", lw=0.8)
plt.xlabel("t (ms)")
plt.ylabel("$v_{out}$ (V)")
plt.legend()
plt.savefig("transient.png", dpi=120)
